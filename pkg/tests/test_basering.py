"""Tests for the base-ring arithmetic."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quiverforge.basering import (
    FREE,
    Indeterminate,
    Ring,
    RingElement,
    frobenius,
    from_subfield_coordinates,
    make_boolfrob_ring,
    make_eps_ring,
    make_field,
    make_trunc_ring,
    parse_element,
    parse_scalar,
    qth_root,
    ring_arith,
    subfield_coordinates,
    to_text,
    trunc_basis,
)
from quiverforge.exceptions import BoundExceededError, PolynomialSyntaxError, RingError

GF3 = make_field(3, 1)
GF4 = make_field(2, 2)
TRUNC = make_trunc_ring(2, 3, GF3)
TRUNC_BASIS = trunc_basis(TRUNC)


def _element(coeffs: list[int]) -> RingElement:
    return TRUNC.from_terms(dict(zip(TRUNC_BASIS, coeffs, strict=True)))


elements = st.lists(st.integers(0, 2), min_size=6, max_size=6).map(_element)


class TestFields:
    """Test cases for finite-field construction."""

    def test_prime_field(self) -> None:
        """Test that GF(p) reduces modulo p."""
        assert GF3.order == 3
        assert GF3.add(2, 2) == 1
        assert GF3.mul(2, 2) == 1
        assert GF3.inv(2) == 2

    def test_extension_field_uses_least_modulus(self) -> None:
        """Test that GF(4) is built on x^2 + x + 1."""
        assert GF4.modulus == (1, 1, 1)
        assert str(GF4) == "GF(2^2)"
        # x * x = x + 1
        assert GF4.mul(2, 2) == 3

    def test_frobenius_has_order_t(self) -> None:
        """Test that applying the Frobenius t times is the identity."""
        for a in GF4.elements():
            assert GF4.frob(GF4.frob(a, 1), 1) == a
        assert GF4.frob(2, 1) == 3

    def test_subfield_membership(self) -> None:
        """Test that only 0 and 1 lie in GF(2) inside GF(4)."""
        assert [a for a in GF4.elements() if GF4.in_subfield(a, 1)] == [0, 1]

    def test_subfield_coordinates(self) -> None:
        """Test coordinates of GF(4) over GF(2) and of GF(16) over GF(4)."""
        assert subfield_coordinates(3, GF4, make_field(2, 1)) == (1, 1)
        gf16 = make_field(2, 4)
        coords = [subfield_coordinates(a, gf16, GF4) for a in gf16.elements()]
        assert len(set(coords)) == 16
        for a, c in zip(gf16.elements(), coords, strict=True):
            assert from_subfield_coordinates(c, gf16, GF4) == a
        with pytest.raises(RingError) as exc_info:
            subfield_coordinates(1, GF4, GF3)
        assert exc_info.value.error_code == "NO_EMBEDDING"

    def test_nonprime_characteristic(self) -> None:
        """Test that a composite characteristic is rejected."""
        with pytest.raises(RingError) as exc_info:
            make_field(4, 1)
        assert exc_info.value.error_code == "NONPRIME_CHARACTERISTIC"

    def test_invalid_degree(self) -> None:
        """Test that degree zero is rejected."""
        with pytest.raises(RingError) as exc_info:
            make_field(2, 0)
        assert exc_info.value.error_code == "INVALID_FIELD_DEGREE"

    def test_field_bound(self) -> None:
        """Test that fields beyond the size bound are refused."""
        with pytest.raises(BoundExceededError) as exc_info:
            make_field(2, 30, bound=2**20)
        assert exc_info.value.error_code == "FIELD_TOO_LARGE"

    def test_division_by_zero(self) -> None:
        """Test that zero has no inverse."""
        with pytest.raises(RingError) as exc_info:
            GF4.inv(0)
        assert exc_info.value.error_code == "DIVISION_BY_ZERO"


class TestRingAxioms:
    """Property tests on the truncated ring F_3[θ1, θ2]/⟨θ⟩^3."""

    def test_basis_size(self) -> None:
        """Test that the truncated basis has C(k+l-1, k) monomials."""
        assert len(TRUNC_BASIS) == 6
        assert len(trunc_basis(make_trunc_ring(2, 4, GF3))) == 10

    @settings(max_examples=50, deadline=None)
    @given(elements, elements, elements)
    def test_associative(self, a: RingElement, b: RingElement, c: RingElement) -> None:
        """Test that multiplication is associative."""
        assert (a * b) * c == a * (b * c)

    @settings(max_examples=50, deadline=None)
    @given(elements, elements, elements)
    def test_distributive(self, a: RingElement, b: RingElement, c: RingElement) -> None:
        """Test that multiplication distributes over addition."""
        assert a * (b + c) == a * b + a * c

    @settings(max_examples=50, deadline=None)
    @given(elements, elements)
    def test_commutative(self, a: RingElement, b: RingElement) -> None:
        """Test that the truncated ring is commutative."""
        assert a * b == b * a

    @settings(max_examples=50, deadline=None)
    @given(elements)
    def test_additive_inverse(self, a: RingElement) -> None:
        """Test that a - a is zero."""
        assert not (a - a)
        assert a + TRUNC.zero == a

    def test_truncation(self) -> None:
        """Test that monomials of total degree 3 vanish."""
        t1, t2 = TRUNC.gen("theta1"), TRUNC.gen("theta2")
        assert t1 * t1 * t2 == TRUNC.zero
        assert t1 * t2 != TRUNC.zero

    def test_unit_inverse(self) -> None:
        """Test that 1 + θ1 is inverted by a geometric series."""
        u = TRUNC.one + TRUNC.gen("theta1")
        assert u * u.inverse() == TRUNC.one

    def test_nilpotent_not_invertible(self) -> None:
        """Test that θ1 has no inverse."""
        with pytest.raises(RingError) as exc_info:
            TRUNC.gen("theta1").inverse()
        assert exc_info.value.error_code == "NOT_INVERTIBLE"

    def test_eps_ring(self) -> None:
        """Test that ε^ℓ = 0 in F[ε]/⟨ε^ℓ⟩."""
        ring = make_eps_ring(3, GF3)
        eps = ring.gen("eps")
        assert eps**2 != ring.zero
        assert eps**3 == ring.zero

    def test_boolean_frobenius_ring(self) -> None:
        """Test that ψ^q = ψ."""
        ring = make_boolfrob_ring(2, 2, make_field(2, 1))
        psi = ring.gen("psi1")
        assert psi**2 == psi
        assert psi**5 == psi

    def test_free_generators_have_no_basis(self) -> None:
        """Test that a free generator makes the ring infinite dimensional."""
        ring = Ring(GF3, (Indeterminate("x", FREE),))
        with pytest.raises(RingError) as exc_info:
            ring.monomial_basis()
        assert exc_info.value.error_code == "INFINITE_DIMENSIONAL"

    def test_ring_mismatch(self) -> None:
        """Test that elements of different fields do not mix."""
        with pytest.raises(RingError) as exc_info:
            Ring(GF3).one + Ring(GF4).one
        assert exc_info.value.error_code == "RING_MISMATCH"

    def test_ring_arith_dispatch(self) -> None:
        """Test dispatch by operation name."""
        two = TRUNC.constant(2)
        assert ring_arith(two, "mul", two) == TRUNC.one
        assert ring_arith(two, "neg") == TRUNC.one
        with pytest.raises(RingError) as exc_info:
            ring_arith(two, "div", two)
        assert exc_info.value.error_code == "UNKNOWN_OPERATION"


class TestFrobenius:
    """Test cases for the Frobenius map on ring elements."""

    def test_on_symbols(self) -> None:
        """Test that Frobenius raises symbols to the q-th power."""
        x = Indeterminate("x", FREE)
        ring = Ring(GF4, (x,))
        assert frobenius(ring.var(x), 1) == ring.var(x) ** 2

    def test_on_scalars(self) -> None:
        """Test that Frobenius agrees with the field map on scalars."""
        ring = Ring(GF4)
        assert frobenius(ring.scalar(2), 1) == ring.scalar(3)
        assert qth_root(frobenius(ring.scalar(2), 1)) == ring.scalar(2)

    def test_nilpotents_refused(self) -> None:
        """Test that Frobenius is not applied to nilpotent generators."""
        with pytest.raises(RingError) as exc_info:
            frobenius(TRUNC.gen("theta1"), 1)
        assert exc_info.value.error_code == "NILPOTENT_FROBENIUS"

    def test_subfield_order_checked(self) -> None:
        """Test that q must be the order of a subfield."""
        with pytest.raises(RingError) as exc_info:
            frobenius(Ring(GF4).scalar(2), 1, q=3)
        assert exc_info.value.error_code == "INVALID_SUBFIELD"


class TestTextForms:
    """Test cases for parsing and printing ring elements."""

    def test_scalar_text(self) -> None:
        """Test the GF(p^t){...} form."""
        ring = Ring(GF4)
        x = parse_element("GF(2^2){0,1}", ring)
        assert x == ring.scalar(2)
        assert to_text(x) == "GF(2^2){0,1}"

    def test_subfield_scalar_embeds(self) -> None:
        """Test that scalars of a subfield are embedded."""
        assert parse_scalar("GF(2^1){1}", GF4) == 1
        assert parse_scalar("-1", GF3) == 2

    def test_foreign_scalar(self) -> None:
        """Test that scalars of another characteristic are rejected."""
        with pytest.raises(PolynomialSyntaxError) as exc_info:
            parse_scalar("GF(3^1){1}", GF4)
        assert exc_info.value.error_code == "INVALID_RING_ELEMENT"

    def test_polynomial_expression(self) -> None:
        """Test expressions in the ring's generators."""
        value = parse_element("2*theta1 + theta2^2 - 1", TRUNC)
        t1, t2 = TRUNC.gen("theta1"), TRUNC.gen("theta2")
        assert value == t1 * 2 + t2 * t2 - 1

    def test_trunc_text_roundtrip(self) -> None:
        """Test that the Trunc(k,l){...} form reads back."""
        value = TRUNC.gen("theta1") * 2 + 1
        assert parse_element(to_text(value), TRUNC) == value

    def test_parameters(self) -> None:
        """Test that unknown names become free parameters only when allowed."""
        value = parse_element("lam + 1", Ring(GF3))
        assert {v.name for v in value.variables()} == {"lam"}
        with pytest.raises(PolynomialSyntaxError) as exc_info:
            parse_element("lam + 1", Ring(GF3), parameters=False)
        assert exc_info.value.error_code == "INVALID_RING_ELEMENT"

    def test_malformed(self) -> None:
        """Test that unbalanced parentheses are reported."""
        with pytest.raises(PolynomialSyntaxError):
            parse_element("(1 + 2", Ring(GF3))
