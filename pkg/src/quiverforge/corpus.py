"""
The bundled example corpus.

Every fixture is a quiver document whose ``expect`` block records results
worked out by hand for that quiver. run_corpus recomputes each expectation
and reports the differences; an empty report means the corpus passes.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from quiverforge.analyze import (
    Cover,
    classify_branch_gluing,
    is_commutative,
    pi_check,
    pseudo_quiver_form,
    subdirect_cover_check,
)
from quiverforge.config import ForgeConfig
from quiverforge.documents import SUFFIX, QuiverDocument, loads
from quiverforge.exceptions import DocumentError, QuiverForgeError
from quiverforge.extract import equivalent, reextract
from quiverforge.materialize import Materialized, materialize
from quiverforge.quiver import FullQuiver, branches, validate
from quiverforge.relations import is_proportional_statement
from quiverforge.transform import compress, geometric_decomposition, proportionalize, run_pipeline

logger = logging.getLogger(__name__)

FIXTURE_PACKAGE = "quiverforge.fixtures"

# Random class orders tried when checking that compression is confluent.
CONFLUENCE_ORDERS = 20


@dataclass
class Diff:
    """One expectation that did not hold."""

    fixture: str
    key: str
    expected: Any
    actual: Any

    def text(self) -> str:
        return f"{self.fixture}: {self.key} expected {self.expected!r}, got {self.actual!r}"


@dataclass
class FixtureResult:
    name: str
    diffs: list[Diff] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.diffs and not self.error


class _Run:
    """Expectation checks for one fixture, sharing the materialized algebra."""

    def __init__(self, name: str, q: FullQuiver, config: ForgeConfig):
        self.name = name
        self.q = q
        self.config = config
        self.diffs: list[Diff] = []
        self._mat: Materialized | None = None

    @property
    def mat(self) -> Materialized:
        if self._mat is None:
            self._mat = materialize(self.q, self.config)
        return self._mat

    def compare(self, key: str, expected: Any, actual: Any) -> None:
        if expected != actual:
            self.diffs.append(Diff(self.name, key, expected, actual))

    def dimension(self, expected: int) -> None:
        self.compare("dimension", expected, self.mat.dimension)

    def nilpotence_index(self, expected: int) -> None:
        self.compare("nilpotence_index", expected, self.mat.nilpotence_index)

    def radical_dimensions(self, expected: list[int]) -> None:
        self.compare("radical_dimensions", expected, self.mat.filtration.dimensions)

    def unital(self, expected: bool) -> None:
        self.compare("unital", expected, self.mat.unital)

    def commutative(self, expected: bool) -> None:
        verdict = is_commutative(self.q, self.config)
        self.compare("commutative", expected, verdict.commutative)
        if not verdict.commutative and verdict.witness is None:
            self.diffs.append(Diff(self.name, "commutative.witness", "a witness", None))

    def max_branch_length(self, expected: int) -> None:
        longest = max((b.length for b in branches(self.q)), default=0)
        self.compare("max_branch_length", expected, longest)

    def compress(self, expected: Mapping[str, Any]) -> None:
        first = compress(self.q).quiver
        if "vertices" in expected:
            self.compare("compress.vertices", expected["vertices"], len(first.vertices))
        if "unchanged" in expected:
            self.compare("compress.unchanged", expected["unchanged"], first == self.q)
        if "infinitesimals" in expected:
            found = sorted(list(v.infinitesimals) for v in first.vertices if v.infinitesimals)
            self.compare("compress.infinitesimals", expected["infinitesimals"], found)
        if expected.get("confluent", True):
            for seed in range(CONFLUENCE_ORDERS):
                other = compress(self.q, seed=seed).quiver
                if not _same_form(first, other):
                    self.compare("compress.confluent", True, f"differs for seed {seed}")
                    break

    def parts(self, expected: int) -> None:
        self.compare("parts", expected, len(geometric_decomposition(self.q)))

    def pseudo(self, expected: Mapping[str, Any]) -> None:
        form = pseudo_quiver_form(self.q)
        if "independent" in expected:
            self.compare("pseudo.independent", expected["independent"], form.independent)
        if "arrows" in expected:
            self.compare("pseudo.arrows", expected["arrows"], len(form.quiver.arrows))

    def covers(self, expected: Mapping[str, Any]) -> None:
        covers = [
            Cover(
                tuple(c["vertices"]),
                tuple(c["arrows"]) if "arrows" in c else None,
                c.get("name", ""),
            )
            for c in expected["covers"]
        ]
        verdict = subdirect_cover_check(self.q, covers, self.config)
        self.compare("covers.verdict", expected["verdict"], verdict.verdict)
        if "witness" in expected:
            self.compare("covers.witness", expected["witness"], verdict.witness)

    def roundtrip(self, expected: bool) -> None:
        found, target = reextract(self.q, self.config)
        self.compare("roundtrip", expected, equivalent(found.quiver, target))

    def pi(self, expected: list[Mapping[str, Any]]) -> None:
        for item in expected:
            mode = item.get("mode", "symbolic")
            verdict = pi_check(self.q, item["polynomial"], mode, self.config)
            self.compare(f"pi[{item['polynomial']}]", item["holds"], verdict.holds)

    def gluing(self, expected: Mapping[str, Any]) -> None:
        report = classify_branch_gluing(self.q)
        if "complete" in expected:
            self.compare("gluing.complete", expected["complete"], report.complete)
        if "kinds" in expected:
            self.compare("gluing.kinds", dict(expected["kinds"]), dict(report.kinds()))

    def proportionalize(self, expected: Mapping[str, Any]) -> None:
        out = proportionalize(self.q, self.config).quiver
        if "vertices" in expected:
            self.compare("proportionalize.vertices", expected["vertices"], len(out.vertices))
        if "proportional" in expected:
            found = all(is_proportional_statement(r) for r in out.relations)
            self.compare("proportionalize.proportional", expected["proportional"], found)

    def pipeline(self, expected: Mapping[str, Any]) -> None:
        out = run_pipeline(self.q, expected["passes"], self.config).quiver
        if "vertices" in expected:
            self.compare("pipeline.vertices", expected["vertices"], len(out.vertices))
        if "dimension" in expected:
            dim = materialize(out, self.config).dimension
            self.compare("pipeline.dimension", expected["dimension"], dim)


_CHECKS: dict[str, Callable[[_Run, Any], None]] = {
    "dimension": _Run.dimension,
    "nilpotence_index": _Run.nilpotence_index,
    "radical_dimensions": _Run.radical_dimensions,
    "unital": _Run.unital,
    "commutative": _Run.commutative,
    "max_branch_length": _Run.max_branch_length,
    "compress": _Run.compress,
    "parts": _Run.parts,
    "pseudo": _Run.pseudo,
    "covers": _Run.covers,
    "roundtrip": _Run.roundtrip,
    "pi": _Run.pi,
    "gluing": _Run.gluing,
    "proportionalize": _Run.proportionalize,
    "pipeline": _Run.pipeline,
}

# Keys that document a fixture rather than request a check.
_NOTES = ("valid", "violations", "provenance")


def _same_form(q1: FullQuiver, q2: FullQuiver) -> bool:
    def shapes(q: FullQuiver) -> list[tuple[int, int | None, tuple[int, ...]]]:
        return sorted((v.degree, v.field_degree, v.infinitesimals) for v in q.vertices)

    return shapes(q1) == shapes(q2) and equivalent(q1, q2)


def list_fixtures() -> list[str]:
    """Names of the bundled fixtures, sorted."""
    root = resources.files(FIXTURE_PACKAGE)
    return sorted(p.name[: -len(SUFFIX)] for p in root.iterdir() if p.name.endswith(SUFFIX))


def load_fixture(name: str, config: ForgeConfig | None = None) -> QuiverDocument:
    """
    Load a bundled fixture without validating it.

    Raises:
        DocumentError: If no fixture has that name or it does not parse.
    """
    path = resources.files(FIXTURE_PACKAGE) / f"{name}{SUFFIX}"
    if not path.is_file():
        raise DocumentError(
            f"No fixture named {name!r}; see `quiverforge corpus --list`", "UNKNOWN_FIXTURE"
        )
    try:
        return loads(path.read_text(encoding="utf-8"), config, check=False)
    except DocumentError as e:
        raise DocumentError(f"Fixture {name}: {e}", e.error_code or "DOCUMENT_ERROR") from e


def run_fixture(doc: QuiverDocument, config: ForgeConfig | None = None) -> FixtureResult:
    """
    Recompute every expectation of one fixture.

    A fixture is expected to validate unless it says ``"valid": false``; the
    violation kinds it lists must all be reported. Invalid fixtures get no
    further checks.
    """
    config = config or ForgeConfig()
    q = doc.quiver
    expect = doc.expect
    run = _Run(q.name, q, config)
    result = FixtureResult(q.name)

    report = validate(q)
    run.compare("valid", expect.get("valid", True), report.ok)
    missing = sorted(set(expect.get("violations", [])) - report.kinds)
    if missing:
        run.diffs.append(Diff(q.name, "violations", expect["violations"], sorted(report.kinds)))
    result.checked.append("valid")
    if not report.ok:
        result.diffs = run.diffs
        return result

    for key, value in expect.items():
        if key in _NOTES:
            continue
        check = _CHECKS.get(key)
        if check is None:
            run.diffs.append(Diff(q.name, key, value, "unknown expectation"))
            continue
        try:
            check(run, value)
        except QuiverForgeError as e:
            logger.error(f"Fixture {q.name}: {key} raised [{e.error_code}] {e}")
            run.diffs.append(Diff(q.name, key, value, f"error {e.error_code}: {e}"))
        result.checked.append(key)
    result.diffs = run.diffs
    return result


def run_corpus(
    config: ForgeConfig | None = None, names: Iterable[str] | None = None
) -> list[FixtureResult]:
    """Run the named fixtures, or all of them."""
    config = config or ForgeConfig()
    results = []
    for name in names if names is not None else list_fixtures():
        try:
            doc = load_fixture(name, config)
        except DocumentError as e:
            results.append(FixtureResult(name, error=f"[{e.error_code}] {e}"))
            continue
        result = run_fixture(doc, config)
        result.name = name
        for d in result.diffs:
            d.fixture = name
        if result.ok:
            logger.info(f"Fixture {name}: {len(result.checked)} checks passed")
        else:
            logger.warning(f"Fixture {name}: {len(result.diffs)} expectation(s) failed")
        results.append(result)
    return results
