"""Tests for the command-line interface."""

from pathlib import Path

import pytest
from typer.testing import CliRunner

import quiverforge.fixtures
from quiverforge.documents import SUFFIX, load
from quiverforge.main import USAGE_EXIT, app, run

runner = CliRunner()

FIXTURES = Path(quiverforge.fixtures.__file__).parent


def fixture_path(name: str) -> str:
    return str(FIXTURES / f"{name}{SUFFIX}")


class TestValidateCommand:
    """Test cases for the validate command."""

    def test_valid(self) -> None:
        """Test that a valid fixture exits cleanly."""
        result = runner.invoke(app, ["validate", fixture_path("B4")])
        assert result.exit_code == 0
        assert "valid full quiver" in result.output

    def test_invalid_exit_code(self) -> None:
        """Test that violations exit with the quiver error code."""
        result = runner.invoke(app, ["--json", "validate", fixture_path("invalid-loop")])
        assert result.exit_code == 4
        assert '"kind": "loop"' in result.output

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that an unreadable document exits with the document error code."""
        result = runner.invoke(app, ["validate", str(tmp_path / "none.quiver.json")])
        assert result.exit_code == 5


class TestGlobalOptions:
    """Test cases for options shared by every command."""

    @pytest.mark.parametrize(
        "args", [["--field", "x"], ["--kproxy", "floating"], ["--trials", "0"]]
    )
    def test_bad_options(self, args: list[str]) -> None:
        """Test that bad global options exit with the configuration error code."""
        result = runner.invoke(app, [*args, "materialize", fixture_path("B4")])
        assert result.exit_code == 2

    def test_unknown_command(self) -> None:
        """Test that usage errors map to their own exit code."""
        assert run(["bogus"]) == USAGE_EXIT


class TestAlgebraCommands:
    """Test cases for materialize, analyze and pi-check."""

    def test_materialize(self) -> None:
        """Test the JSON summary of B4."""
        result = runner.invoke(app, ["--json", "materialize", fixture_path("B4")])
        assert result.exit_code == 0
        assert '"dimension": 4' in result.output

    def test_analyze(self) -> None:
        """Test the default analyses of the Grassmann square."""
        result = runner.invoke(app, ["--json", "analyze", fixture_path("grassmann2")])
        assert result.exit_code == 0
        assert '"index": 3' in result.output
        assert '"permuted": 1' in result.output

    def test_pi_check(self) -> None:
        """Test an identity that holds on strictly upper triangular matrices."""
        result = runner.invoke(app, ["pi-check", fixture_path("strict-upper4"), "x1 x2 x3 x4"])
        assert result.exit_code == 0
        assert "holds" in result.output

    def test_pi_check_syntax_error(self) -> None:
        """Test that a malformed polynomial is reported."""
        result = runner.invoke(app, ["pi-check", fixture_path("B4"), "x1 +"])
        assert result.exit_code == 5


class TestPassCommands:
    """Test cases for the quiver-improvement commands."""

    def test_compress_to_file(self, tmp_path: Path) -> None:
        """Test that the compressed quiver is written as a document."""
        out = tmp_path / f"B4c{SUFFIX}"
        result = runner.invoke(app, ["compress", fixture_path("B4"), "-o", str(out)])
        assert result.exit_code == 0
        assert [v.infinitesimals for v in load(out).quiver.vertices] == [(4,)]

    def test_pipeline_with_trade(self) -> None:
        """Test a pipeline entry carrying an arrow pattern."""
        result = runner.invoke(app, ["--json", "pipeline", fixture_path("pseud"), "trade:a1,a2"])
        assert result.exit_code == 0
        assert '"vertices": 2' in result.output

    def test_unknown_pass(self) -> None:
        """Test that an unknown pass exits with the pass error code."""
        result = runner.invoke(app, ["pipeline", fixture_path("B4"), "bogus"])
        assert result.exit_code == 7

    def test_decompose(self, tmp_path: Path) -> None:
        """Test that each part is written to the output directory."""
        result = runner.invoke(app, ["decompose", fixture_path("EE211"), "-d", str(tmp_path)])
        assert result.exit_code == 0
        assert len(list(tmp_path.glob(f"*{SUFFIX}"))) == 2


class TestOtherCommands:
    """Test cases for dot and corpus."""

    def test_dot(self) -> None:
        """Test that DOT text goes to stdout."""
        result = runner.invoke(app, ["dot", fixture_path("grassmann2")])
        assert result.exit_code == 0
        assert "digraph" in result.output

    def test_corpus_list(self) -> None:
        """Test listing the bundled fixtures."""
        result = runner.invoke(app, ["corpus", "--list"])
        assert result.exit_code == 0
        assert "grassmann3" in result.output

    def test_corpus_selection(self) -> None:
        """Test running named fixtures."""
        result = runner.invoke(app, ["--json", "corpus", "E1", "B4"])
        assert result.exit_code == 0
        assert '"failed": 0' in result.output

    def test_corpus_failure(self) -> None:
        """Test that an unknown fixture fails the run."""
        result = runner.invoke(app, ["corpus", "missing"])
        assert result.exit_code == 1
