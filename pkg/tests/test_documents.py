"""Tests for quiver documents and DOT export."""

import json
from collections.abc import Callable
from pathlib import Path

import pytest

from quiverforge.basering import make_field
from quiverforge.corpus import load_fixture
from quiverforge.documents import FORMAT_VERSION, dumps, export_dot, load, loads, save
from quiverforge.exceptions import DocumentError
from quiverforge.quiver import Arrow, FullQuiver, Vertex, glued_triangle
from quiverforge.transform import compress

GF2 = make_field(2, 1)


def _document(**overrides: object) -> str:
    doc: dict[str, object] = {
        "format_version": FORMAT_VERSION,
        "name": "doc",
        "base": {"p": 2, "t": 1},
        "vertices": [{"id": "v1"}, {"id": "v2"}],
        "arrows": [{"id": "a1", "from": "v1", "to": "v2"}],
    }
    doc.update(overrides)
    return json.dumps(doc)


class TestRoundtrip:
    """Test cases for writing and re-reading documents."""

    @pytest.mark.parametrize("name", ["grassmann2", "path-abc", "ex0", "EG2", "invalid-cocycle"])
    def test_text_is_stable(self, name: str) -> None:
        """Test that a re-read document writes back the same text."""
        doc = load_fixture(name)
        text = dumps(doc.quiver, doc.expect, doc.description)
        back = loads(text, check=False)
        assert back.expect == doc.expect
        assert back.description == doc.description
        assert dumps(back.quiver, back.expect, back.description) == text

    def test_infinitesimals_survive(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that a compressed quiver keeps its infinitesimal partition."""
        q = compress(fixture_quiver("ladder-twin")).quiver
        back = loads(dumps(q)).quiver
        assert [v.infinitesimals for v in back.vertices] == [(2, 2)]

    def test_save_and_load(self, tmp_path: Path) -> None:
        """Test writing to and reading from disk."""
        path = tmp_path / "I3.quiver.json"
        save(glued_triangle(3), path, {"dimension": 3})
        doc = load(path)
        assert doc.quiver.name == "I(3)"
        assert doc.expect == {"dimension": 3}
        assert len(doc.quiver.arrows) == 3


class TestDecodingErrors:
    """Test cases for rejected documents."""

    def test_invalid_json(self) -> None:
        """Test that the parse position is reported."""
        with pytest.raises(DocumentError) as exc_info:
            loads("{")
        assert exc_info.value.error_code == "INVALID_JSON"
        assert "line 1" in str(exc_info.value)

    def test_unsupported_version(self) -> None:
        """Test that only the current format version is read."""
        with pytest.raises(DocumentError) as exc_info:
            loads(_document(format_version=FORMAT_VERSION + 1))
        assert exc_info.value.error_code == "UNSUPPORTED_VERSION"

    def test_missing_field(self) -> None:
        """Test that the JSON path of a missing field is named."""
        with pytest.raises(DocumentError) as exc_info:
            loads(_document(arrows=[{"id": "a1", "from": "v1"}]))
        assert exc_info.value.error_code == "MISSING_FIELD"
        assert "arrows[0]" in str(exc_info.value)

    def test_mistyped_field(self) -> None:
        """Test that booleans are not accepted as numbers."""
        with pytest.raises(DocumentError) as exc_info:
            loads(_document(vertices=[{"id": "v1", "degree": True}, {"id": "v2"}]))
        assert exc_info.value.error_code == "INVALID_FIELD"

    def test_duplicate_id(self) -> None:
        """Test that vertex ids are unique."""
        with pytest.raises(DocumentError) as exc_info:
            loads(_document(vertices=[{"id": "v1"}, {"id": "v2"}, {"id": "v1"}]))
        assert exc_info.value.error_code == "DUPLICATE_ID"

    def test_unknown_endpoint(self) -> None:
        """Test that arrows must join listed vertices."""
        with pytest.raises(DocumentError) as exc_info:
            loads(_document(arrows=[{"id": "a1", "from": "v1", "to": "v9"}]))
        assert exc_info.value.error_code == "UNKNOWN_VERTEX"

    def test_invalid_quiver(self) -> None:
        """Test that checked loading validates the quiver."""
        q = FullQuiver("loop", GF2, (Vertex("v1"),), (Arrow("a1", "v1", "v1"),))
        text = dumps(q)
        with pytest.raises(DocumentError) as exc_info:
            loads(text)
        assert exc_info.value.error_code == "INVALID_QUIVER"
        assert "loop" in str(exc_info.value)
        assert loads(text, check=False).quiver.name == "loop"

    def test_unreadable(self, tmp_path: Path) -> None:
        """Test that a missing file is reported."""
        with pytest.raises(DocumentError) as exc_info:
            load(tmp_path / "missing.quiver.json")
        assert exc_info.value.error_code == "UNREADABLE_DOCUMENT"


class TestExportDot:
    """Test cases for Graphviz export."""

    def test_cube(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test node and edge counts of the Grassmann cube."""
        source = export_dot(fixture_quiver("grassmann3"))
        lines = source.splitlines()
        assert sum("->" in line for line in lines) == 12
        assert sum("[label=" in line and "->" not in line for line in lines) == 8
        assert "rankdir=LR" in source

    def test_deterministic(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that repeated exports are identical."""
        q = fixture_quiver("grassmann3")
        assert export_dot(q) == export_dot(q)

    def test_class_colors(self) -> None:
        """Test that arrows of one glue class share a color."""
        source = export_dot(glued_triangle(3))
        edges = [line for line in source.splitlines() if "->" in line]
        colors = [line.split("color=")[-1] for line in edges]
        assert all("color=" in line for line in edges)
        assert len(set(colors)) == 2
