"""Tests for matrices and exact linear algebra."""

import pytest

from quiverforge.basering import FREE, Indeterminate, Ring, make_field
from quiverforge.exceptions import RingError
from quiverforge.linalg import (
    Coordinates,
    EchelonSpace,
    Matrix,
    independent_subset,
    null_space,
    rank,
    solve_in_span,
)

GF3 = make_field(3, 1)
RING = Ring(GF3)


class TestMatrix:
    """Test cases for sparse ring-valued matrices."""

    def test_unit_products(self) -> None:
        """Test e12 · e23 = e13 and e23 · e12 = 0."""
        e12 = Matrix.unit(3, RING, 0, 1)
        e23 = Matrix.unit(3, RING, 1, 2)
        assert e12.matmul(e23) == Matrix.unit(3, RING, 0, 2)
        assert not e23.matmul(e12)

    def test_identity(self) -> None:
        """Test that the identity is neutral."""
        m = Matrix.from_rows([[1, 2], [0, 1]], RING)
        ident = Matrix.identity(2, RING)
        assert m.matmul(ident) == m
        assert ident.matmul(m) == m

    def test_power_and_commutator(self) -> None:
        """Test nilpotent powers and commutators of units."""
        n = Matrix.from_rows([[0, 1, 0], [0, 0, 1], [0, 0, 0]], RING)
        assert n**2 == Matrix.unit(3, RING, 0, 2)
        assert not n**3
        e11 = Matrix.unit(3, RING, 0, 0)
        assert e11.commutator(n) == Matrix.unit(3, RING, 0, 1)

    def test_scalar_multiplication(self) -> None:
        """Test scaling by an integer reduces modulo p."""
        m = Matrix.from_rows([[2, 0], [0, 1]], RING)
        assert m * 2 == Matrix.from_rows([[1, 0], [0, 2]], RING)

    def test_size_mismatch(self) -> None:
        """Test that matrices of different sizes do not combine."""
        with pytest.raises(RingError) as exc_info:
            Matrix.identity(2, RING) + Matrix.identity(3, RING)
        assert exc_info.value.error_code == "MATRIX_SIZE_MISMATCH"

    def test_restrict_and_transpose(self) -> None:
        """Test masking entries and transposition."""
        m = Matrix.from_rows([[1, 2], [0, 1]], RING)
        upper = m.restrict(lambda i, j: i < j)
        assert upper == Matrix.build(2, RING, {(0, 1): RING.constant(2)})
        assert upper.transpose() == Matrix.build(2, RING, {(1, 0): RING.constant(2)})


class TestCoordinates:
    """Test cases for monomial coordinates."""

    def test_vector_roundtrip(self) -> None:
        """Test that a symbolic matrix splits into monomial coordinates and back."""
        x = Indeterminate("x", FREE)
        ring = Ring(GF3, (x,))
        m = Matrix.build(2, ring, {(0, 1): ring.var(x) + 1, (1, 1): ring.constant(2)})
        coords = Coordinates()
        vec = coords.vector(m)
        assert len(vec) == 3
        assert coords.matrix(vec, 2, ring) == m

    def test_span_over_subfield(self) -> None:
        """Test that the GF(4) multiples of the identity span two dimensions over GF(2)."""
        gf2, gf4 = make_field(2, 1), make_field(2, 2)
        ring = Ring(gf4)
        scaled = [Matrix.identity(2, ring).map(lambda x, c=c: x.scale(c)) for c in (1, 2, 3)]
        space = EchelonSpace(gf2, 2, ring)
        assert space.extend(scaled) == scaled[:2]
        assert space.express([scaled[2]]) == [[1, 1]]
        vec = space.coords.vector(scaled[1], gf2)
        assert space.coords.matrix(vec, 2, ring, gf2) == scaled[1]


class TestRowReduction:
    """Test cases for rank, null spaces and span membership over GF(3)."""

    def test_rank(self) -> None:
        """Test the rank of dependent vectors."""
        vectors = [{0: 1, 1: 1}, {0: 2, 1: 2}, {2: 1}]
        assert rank(GF3, vectors, 3) == 2

    def test_independent_subset_is_greedy(self) -> None:
        """Test that the first independent vectors are kept."""
        vectors = [{0: 1}, {0: 2}, {1: 1}, {0: 1, 1: 1}]
        assert independent_subset(GF3, vectors, 2) == [0, 2]

    def test_null_space(self) -> None:
        """Test that x + y + z = 0 has a two-dimensional kernel."""
        basis = null_space(GF3, [[1, 1, 1]])
        assert len(basis) == 2
        for v in basis:
            assert sum(v) % 3 == 0

    def test_solve_in_span(self) -> None:
        """Test coefficients of a target in an independent basis."""
        basis = [{0: 1}, {1: 1}]
        assert solve_in_span(GF3, basis, [{0: 2, 1: 1}], 2) == [[2, 1]]
        assert solve_in_span(GF3, basis[:1], [{1: 1}], 2) is None


class TestEchelonSpace:
    """Test cases for spans of matrices."""

    def test_extend_keeps_new_directions(self) -> None:
        """Test that only independent matrices are added."""
        space = EchelonSpace(GF3, 2, RING)
        e12 = Matrix.unit(2, RING, 0, 1)
        added = space.extend([e12, e12 * 2, Matrix.identity(2, RING)])
        assert added == [e12, Matrix.identity(2, RING)]
        assert space.dimension == 2

    def test_contains_and_express(self) -> None:
        """Test membership and coordinates in the basis."""
        space = EchelonSpace(GF3, 2, RING)
        e11 = Matrix.unit(2, RING, 0, 0)
        e12 = Matrix.unit(2, RING, 0, 1)
        space.extend([e11, e12])
        target = e11 + e12 * 2
        assert space.contains(target)
        assert space.express([target]) == [[1, 2]]
        assert space.combination([1, 2]) == target
        assert not space.contains(Matrix.unit(2, RING, 1, 1))

    def test_express_outside_span(self) -> None:
        """Test that a matrix outside the span is reported."""
        space = EchelonSpace(GF3, 2, RING)
        space.extend([Matrix.unit(2, RING, 0, 0)])
        with pytest.raises(RingError) as exc_info:
            space.express([Matrix.unit(2, RING, 1, 1)])
        assert exc_info.value.error_code == "NOT_IN_SPAN"
