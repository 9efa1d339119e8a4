"""Tests for materializing full quivers as matrix algebras."""

from collections.abc import Callable

import pytest

from quiverforge.basering import Ring, make_field
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import BoundExceededError, QuiverError, RingError
from quiverforge.linalg import Matrix
from quiverforge.materialize import (
    BlockLayout,
    algebra_element,
    check_gluing,
    decompress,
    generic_element,
    layout,
    materialize,
    radical_powers,
    span_closure,
    specialize,
)
from quiverforge.quiver import (
    FullQuiver,
    Vertex,
    elementary_quiver,
    glued_triangle,
    infinite_base,
    validate,
)

GF3 = make_field(3, 1)


class TestGluedTriangle:
    """Test cases for I(ℓ), whose algebra is F[λ]/⟨λ^ℓ⟩."""

    @pytest.mark.parametrize("ell", [2, 3, 4, 5, 6])
    def test_truncated_polynomial_ring(self, ell: int) -> None:
        """Test dimension ℓ and nilpotence index ℓ."""
        mat = materialize(glued_triangle(ell))
        assert mat.dimension == ell
        assert mat.nilpotence_index == ell
        assert mat.filtration.dimensions == list(range(ell - 1, 0, -1))
        assert mat.unital
        assert not mat.probabilistic

    def test_summary(self) -> None:
        """Test the reported summary fields."""
        summary = materialize(glued_triangle(3)).summary()
        assert summary["quiver"] == "I(3)"
        assert summary["size"] == 3
        assert summary["dimension"] == 3
        assert summary["radical_dimensions"] == [2, 1]


class TestElementary:
    """Test cases for the single-arrow quivers."""

    def test_unglued_arrow(self) -> None:
        """Test that E1 is the upper triangular 2x2 algebra."""
        mat = materialize(elementary_quiver("E1"))
        assert mat.dimension == 3
        assert mat.filtration.dimensions == [1]

    def test_identical_gluing(self) -> None:
        """Test that E2 is F[λ]/⟨λ^2⟩."""
        mat = materialize(elementary_quiver("E2"))
        assert mat.dimension == 2
        assert mat.nilpotence_index == 2

    def test_zero_vertex_is_not_unital(self) -> None:
        """Test that a zero vertex drops the identity."""
        mat = materialize(elementary_quiver("E4"))
        assert not mat.unital
        assert mat.dimension == 2

    def test_zero_arrow_only(self) -> None:
        """Test that E5 is a one-dimensional square-zero algebra."""
        mat = materialize(elementary_quiver("E5"))
        assert mat.dimension == 1
        assert mat.nilpotence_index == 2

    @pytest.mark.parametrize("p,t1", [(2, 2), (3, 2), (2, 3)])
    def test_frobenius_gluing(self, p: int, t1: int) -> None:
        """Test that E3 over GF(q^t1) has dimension 2·t1 over GF(q) and keeps its gluing."""
        q = elementary_quiver("E3", t1=t1, u=1, base=make_field(p, 1))
        mat = materialize(q)
        assert mat.dimension == 2 * t1
        assert mat.filtration.dimensions == [t1]
        assert all(check_gluing(q, mat.layout, b) == [] for b in mat.basis.basis)

    @pytest.mark.parametrize(
        "name,dims",
        [("grassmann2", [3, 1]), ("grassmann3", [7, 4, 1]), ("gluerad", [6, 3, 1])],
    )
    def test_fixture_filtrations(
        self, fixture_quiver: Callable[[str], FullQuiver], name: str, dims: list[int]
    ) -> None:
        """Test radical filtrations of bundled fixtures."""
        mat = materialize(fixture_quiver(name))
        assert mat.filtration.dimensions == dims


class TestLayout:
    """Test cases for block layouts."""

    def test_blocks(self) -> None:
        """Test offsets and owners for blocks of sizes 2 and 3."""
        lay = layout(elementary_quiver("E1", m=2, n=3))
        assert lay.sizes == (2, 3)
        assert lay.size == 5
        assert lay.block("v2") == range(2, 5)
        assert lay.owner(4) == "v2"
        assert lay.diagonal(0, 1)
        assert not lay.diagonal(1, 2)

    def test_index_outside(self) -> None:
        """Test that indices past the layout are rejected."""
        lay = layout(elementary_quiver("E1"))
        with pytest.raises(QuiverError) as exc_info:
            lay.owner(9)
        assert exc_info.value.error_code == "INVALID_INDEX"


class TestDecompress:
    """Test cases for undoing compression."""

    def test_infinitesimal_becomes_triangle(self) -> None:
        """Test that a vertex with infinitesimal (3) becomes I(3)."""
        q = FullQuiver(
            "eps3",
            infinite_base(),
            (Vertex("v", "I", 1, None, infinitesimals=(3,)),),
            infinite=True,
        )
        flat = decompress(q)
        assert [v.id for v in flat.vertices] == ["v.1", "v.2", "v.3"]
        assert len(flat.arrows) == 3
        assert {cls: len(a) for cls, a in flat.arrow_classes().items()} == {
            "I.eps1.1": 2,
            "I.eps1.2": 1,
        }
        assert validate(flat).ok
        assert materialize(q).dimension == 3


class TestSpecialize:
    """Test cases for points of the generic element."""

    def test_points_satisfy_gluing(self) -> None:
        """Test that a specialized generic element passes the gluing check."""
        q = elementary_quiver("E2", t1=1, base=GF3)
        g = generic_element(q)
        m = specialize(g, {s.name: 2 for s in g.symbols})
        assert m
        assert check_gluing(q, g.layout, m) == []

    def test_gluing_violation(self) -> None:
        """Test that unequal diagonal entries break identical gluing."""
        q = elementary_quiver("E2", t1=1, base=GF3)
        lay = layout(q)
        m = Matrix.from_rows([[1, 0], [0, 2]], Ring(GF3))
        problems = check_gluing(q, lay, m)
        assert problems == ["vertex v2 is not the twisted copy of v1"]

    def test_zero_vertex_violation(self) -> None:
        """Test that a zero vertex must carry a zero block."""
        q = elementary_quiver("E4", t2=1, base=GF3)
        lay = layout(q)
        m = Matrix.from_rows([[1, 0], [0, 0]], Ring(GF3))
        assert check_gluing(q, lay, m) == ["zero vertex v1 has a nonzero block"]

    def test_missing_symbol(self) -> None:
        """Test that every generic symbol needs a value."""
        g = generic_element(elementary_quiver("E1", t1=1, t2=1, base=GF3))
        with pytest.raises(RingError) as exc_info:
            specialize(g, {})
        assert exc_info.value.error_code == "MISSING_SYMBOL"


class TestBounds:
    """Test cases for the span-closure bound."""

    def test_span_bound(self) -> None:
        """Test that a basis larger than the bound is refused."""
        with pytest.raises(BoundExceededError) as exc_info:
            materialize(glued_triangle(4), ForgeConfig(span_bound=2))
        assert exc_info.value.error_code == "SPAN_TOO_LARGE"


class TestSpanClosure:
    """Test cases for span closure and the radical filtration."""

    def test_upper_unitriangular(self) -> None:
        """Test that 1, e12, e23 close to a 4-dimensional algebra with J² = ⟨e13⟩."""
        ring = Ring(GF3)
        gens = [Matrix.unit(3, ring, 0, 1), Matrix.unit(3, ring, 1, 2)]
        alg = span_closure(gens, GF3, 3, ring)
        assert alg.dimension == 4
        filtration = radical_powers(alg, BlockLayout(("v1", "v2", "v3"), (1, 1, 1)))
        assert filtration.dimensions == [3, 1]
        assert filtration.nilpotence_index == 3

    def test_non_unital(self) -> None:
        """Test that without the identity only the products are added."""
        ring = Ring(GF3)
        gens = [Matrix.unit(3, ring, 0, 1), Matrix.unit(3, ring, 1, 2)]
        assert span_closure(gens, GF3, 3, ring, unital=False).dimension == 3


class TestAlgebraElement:
    """Test cases for generic elements of the whole algebra."""

    def test_covers_products(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that the Grassmann corner, filled only by products, is covered."""
        mat = materialize(fixture_quiver("grassmann2"))
        g = algebra_element(mat)
        at = mat.layout.offsets
        corner = (at["v00"], at["v11"])
        assert len(g.symbols) == mat.dimension == 4
        assert not mat.generic.matrix.get(*corner)
        assert g.matrix.get(*corner)

    def test_points_lie_in_algebra(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that a point over GF(2) passes the Frobenius gluing check of E3."""
        mat = materialize(fixture_quiver("E3"))
        g = algebra_element(mat, tag="y")
        assert all(s.name.startswith("y:") for s in g.symbols)
        m = specialize(g, {s.name: 1 for s in g.symbols})
        assert m
        assert check_gluing(mat.quiver, mat.layout, m) == []
