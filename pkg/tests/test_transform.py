"""Tests for the quiver-improvement passes."""

import dataclasses
import random
from collections.abc import Callable

import pytest

from quiverforge.basering import Ring, make_field
from quiverforge.exceptions import PassError
from quiverforge.extract import equivalent
from quiverforge.linalg import Matrix
from quiverforge.materialize import materialize
from quiverforge.quiver import FullQuiver, glued_triangle, infinite_base, path_quiver
from quiverforge.relations import RelationSet, is_proportional_statement
from quiverforge.transform import (
    PASS_NAMES,
    compress,
    decompress,
    frobenius_proportionalize,
    geometric_decomposition,
    is_geometrically_indecomposable,
    normalize_branch,
    proportionalize,
    qpoly_eliminate,
    remove_degenerate_gluing,
    run_pipeline,
    trade_arrows,
)

GF2 = make_field(2, 1)
GF3 = make_field(3, 1)


def _ratio_pairs(count: int, seed: int = 11) -> list[tuple[int, int]]:
    """Seeded ν pairs for EG2 with 1 + λλ' ≠ 0 over the K stand-in."""
    p = infinite_base().p
    rng = random.Random(seed)
    pairs: list[tuple[int, int]] = []
    while len(pairs) < count:
        lam, lam2 = rng.randrange(2, p), rng.randrange(2, p)
        if (1 + lam * lam2) % p:
            pairs.append((lam, lam2))
    return pairs


def _frobenius_path() -> FullQuiver:
    """v1 → v2 → v3 over GF(2) with alpha = beta^q."""
    q = path_quiver("fp", [None, None, None], ["alpha", "beta"], base=GF2)
    return q.replace(relations=RelationSet.parse(["alpha - beta^q"], GF2))


class TestCompress:
    """Test cases for compression of glued triangles."""

    def test_triangle_compresses_to_one_vertex(
        self, fixture_quiver: Callable[[str], FullQuiver]
    ) -> None:
        """Test that B4 becomes one vertex with infinitesimal (4)."""
        result = compress(fixture_quiver("B4"))
        assert result.changed
        assert [v.infinitesimals for v in result.quiver.vertices] == [(4,)]
        assert "output validates" in result.certificate

    def test_incompressible(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that a quiver without qualifying triangles is unchanged."""
        q = fixture_quiver("compress-none")
        result = compress(q)
        assert not result.changed
        assert result.quiver == q

    def test_ladder_compresses_twice(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that the twin ladder ends with infinitesimals (2, 2)."""
        result = compress(fixture_quiver("ladder-twin"))
        assert [v.infinitesimals for v in result.quiver.vertices] == [(2, 2)]
        assert len(result.trace) == 2

    def test_order_independence(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that shuffled class orders reach the same form."""
        q = fixture_quiver("ladder-mixed")
        first = compress(q).quiver
        for seed in range(5):
            other = compress(q, seed=seed).quiver
            assert sorted(v.infinitesimals for v in other.vertices) == sorted(
                v.infinitesimals for v in first.vertices
            )
            assert equivalent(first, other)

    def test_decompress_inverts(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that decompressing the compressed form recovers the quiver."""
        q = fixture_quiver("B4")
        back = decompress(compress(q).quiver)
        assert back.changed
        assert equivalent(back.quiver, q)
        assert not decompress(q).changed


class TestNormalize:
    """Test cases for branch normalization."""

    def test_labels_become_one(self) -> None:
        """Test that conjugation moves ν = 2 into the diagonal."""
        q = path_quiver("np", [None, None, None], [None, None], base=GF3)
        a1, a2 = q.arrows
        q = q.replace(arrows=(dataclasses.replace(a1, nu=Ring(GF3).constant(2)), a2))
        result = normalize_branch(q)
        assert all(a.nu is None for a in result.quiver.arrows)
        assert result.notes["diagonal"] == [1, 2, 2]

    def test_not_a_path(self) -> None:
        """Test that the arrow ids must form a path."""
        q = glued_triangle(3)
        with pytest.raises(PassError) as exc_info:
            normalize_branch(q, ["a13", "a23"])
        assert exc_info.value.error_code == "INVALID_BRANCH"


class TestTrade:
    """Test cases for arrow trading."""

    def test_fan_trade(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that two proportional arrows become one with the summed label."""
        result = trade_arrows(fixture_quiver("pseud"), ("a1", "a2"))
        assert len(result.quiver.vertices) == 2
        assert [a.id for a in result.quiver.arrows] == ["a1"]
        assert materialize(result.quiver).dimension == 3

    def test_not_a_pattern(self) -> None:
        """Test that arrows without a common end are refused."""
        with pytest.raises(PassError) as exc_info:
            trade_arrows(glued_triangle(3), ("a12", "a23"))
        assert exc_info.value.error_code == "NOT_A_PATTERN"


class TestDegenerateGluing:
    """Test cases for parallel identically glued branches."""

    def test_nonzero_composite_merges(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that 1 + 2·3 ≠ 0 merges the branches."""
        result = remove_degenerate_gluing(fixture_quiver("EG2"))
        assert len(result.quiver.vertices) == 3
        assert "kind=merge" in result.trace[0]
        assert materialize(result.quiver).dimension == 6

    def test_cancelling_composite_separates(
        self, fixture_quiver: Callable[[str], FullQuiver]
    ) -> None:
        """Test that a vanishing composite introduces annihilated ξ symbols."""
        result = remove_degenerate_gluing(fixture_quiver("EG2-degenerate"))
        assert len(result.quiver.vertices) == 3
        assert "kind=separate" in result.trace[0]
        assert {g.name for g in result.quiver.coeff_ring.gens} >= {"xi1", "xi2"}
        assert materialize(result.quiver).dimension == 5

    @pytest.mark.parametrize("lam,lam2", _ratio_pairs(5))
    def test_random_ratios_merge(
        self, fixture_quiver: Callable[[str], FullQuiver], lam: int, lam2: int
    ) -> None:
        """Test that J² is spanned by (1+λλ')e14 and the branches merge into a path."""
        q = fixture_quiver("EG2")
        ratios = {"a2": lam, "a4": lam2}
        q = q.replace(
            arrows=tuple(
                dataclasses.replace(a, nu=q.coeff_ring.scalar(ratios[a.id]))
                if a.id in ratios
                else a
                for a in q.arrows
            )
        )
        fld = q.field
        composite = fld.add(1, fld.mul(lam, lam2))

        mat = materialize(q)
        assert mat.nilpotence_index == 3
        radical = mat.filtration.radical
        assert radical is not None
        ring, at = radical.ring, mat.layout.offsets
        v1, v2, v3, v4 = (at[v] for v in ("v1", "v2", "v3", "v4"))
        alpha = Matrix.build(4, ring, {(v1, v2): ring.one, (v1, v3): ring.scalar(lam)})
        beta = Matrix.build(4, ring, {(v2, v4): ring.one, (v3, v4): ring.scalar(lam2)})
        assert radical.contains(alpha)
        assert radical.contains(beta)
        corner = Matrix.unit(4, ring, v1, v4)
        assert alpha.matmul(beta) == Matrix.build(4, ring, {(v1, v4): ring.scalar(composite)})
        assert mat.filtration.dimensions[1] == 1
        assert mat.filtration.spaces[1].contains(corner)

        out = run_pipeline(q, ["degenerate"]).quiver
        assert len(out.vertices) == 3
        assert len(out.arrows) == 2
        first, last = sorted(out.arrows, key=lambda a: out.index[a.src])
        assert (first.src, last.dst) == ("v1", "v4") and first.dst == last.src
        assert fld.mul(out.nu(first).scalar, out.nu(last).scalar) == composite
        assert materialize(out).dimension == 6


class TestProportionalize:
    """Test cases for replacing linear relations by gluing."""

    def test_grid(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test the θ grid of the path with alpha = beta + gamma."""
        result = proportionalize(fixture_quiver("path-abc"))
        assert len(result.quiver.vertices) == 40
        assert all(is_proportional_statement(r) for r in result.quiver.relations)
        assert "relations are proportional gluing statements" in result.certificate

    def test_without_relations(self) -> None:
        """Test that a quiver without relations passes through."""
        q = glued_triangle(2)
        result = proportionalize(q)
        assert result.quiver is q
        assert result.certificate == ["no relations", "output validates"]

    def test_frobenius_relations_refused(self) -> None:
        """Test that q-power relations need the Frobenius variant."""
        with pytest.raises(PassError) as exc_info:
            proportionalize(_frobenius_path())
        assert exc_info.value.error_code == "NONLINEAR_RELATIONS"

    def test_frobenius_already_proportional(self) -> None:
        """Test that alpha = beta^q is left alone."""
        q = _frobenius_path()
        result = frobenius_proportionalize(q)
        assert result.quiver is q
        assert not result.changed

    def test_frobenius_needs_finite_base(self) -> None:
        """Test that the Frobenius variant is refused over K."""
        with pytest.raises(PassError) as exc_info:
            frobenius_proportionalize(glued_triangle(2))
        assert exc_info.value.error_code == "INFINITE_BASE"


class TestElimination:
    """Test cases for the q-polynomial elimination pass."""

    def test_frobenius_pivot(self) -> None:
        """Test that alpha is expressed as beta^q."""
        solved = qpoly_eliminate(RelationSet.parse(["alpha - beta^q"], GF2), 4, GF2)
        assert solved.independent == ("beta",)
        assert solved.dependent_map()["alpha"].text(GF2) == "beta^q"

    def test_invalid_truncation(self) -> None:
        """Test that a zero truncation is refused."""
        with pytest.raises(PassError) as exc_info:
            qpoly_eliminate(RelationSet(), 0, GF3)
        assert exc_info.value.error_code == "INVALID_TRUNCATION"


class TestDecomposition:
    """Test cases for geometric decomposition."""

    def test_diamond_splits(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that alpha-beta and alpha-gamma form two parts."""
        q = fixture_quiver("EE211")
        parts = geometric_decomposition(q)
        assert [p.name for p in parts] == [f"{q.name}/part1", f"{q.name}/part2"]
        assert not is_geometrically_indecomposable(q)

    def test_triangle_is_indecomposable(self) -> None:
        """Test that I(3) is one part."""
        assert is_geometrically_indecomposable(glued_triangle(3))


class TestPipeline:
    """Test cases for running passes in sequence."""

    def test_certificates_are_prefixed(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that compress then decompress round-trips with labeled certificates."""
        q = fixture_quiver("B4")
        result = run_pipeline(q, ["compress", "decompress"])
        assert equivalent(result.quiver, q)
        assert "compress: output validates" in result.certificate
        assert "decompress: output validates" in result.certificate
        assert set(result.notes) == {"compress", "decompress"}

    def test_parameters(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test a pass given with parameters."""
        result = run_pipeline(fixture_quiver("pseud"), [("trade", {"pattern": ["a1", "a2"]})])
        assert len(result.quiver.vertices) == 2

    def test_unknown_pass(self) -> None:
        """Test that unknown pass names are refused."""
        with pytest.raises(PassError) as exc_info:
            run_pipeline(glued_triangle(2), ["bogus"])
        assert exc_info.value.error_code == "UNKNOWN_PASS"
        assert "compress" in PASS_NAMES
