"""Tests for q-polynomial relations and their elimination."""

import random

import pytest

from quiverforge.basering import FieldSpec, make_field
from quiverforge.exceptions import PassError, PolynomialSyntaxError
from quiverforge.relations import (
    QRelation,
    QTerm,
    RelationSet,
    eliminate,
    enumerate_solutions,
    is_proportional_statement,
    parse_qpolynomial,
    self_relation_degree,
)

GF2 = make_field(2, 1)
GF3 = make_field(3, 1)
GF4 = make_field(2, 2)

SYMBOLS = ("x", "y", "z")


def _random_system(rng: random.Random, fld: FieldSpec) -> RelationSet:
    """At most two relations in at most three symbols, q-powers up to q^2."""
    relations = []
    for _ in range(rng.randint(1, 2)):
        terms = [
            QTerm(rng.choice(SYMBOLS), rng.randint(0, 2), rng.randrange(1, fld.order))
            for _ in range(rng.randint(1, 3))
        ]
        relations.append(QRelation.of(terms, fld))
    return RelationSet(tuple(r for r in relations if r))


class TestParsing:
    """Test cases for the q-polynomial text form."""

    def test_linear_relation(self) -> None:
        """Test that the sum relation reads and prints back."""
        rel = parse_qpolynomial("alpha - beta - gamma", GF3)
        assert rel.symbols() == ["alpha", "beta", "gamma"]
        assert rel.text(GF3) == "alpha - beta - gamma"
        assert rel.is_linear

    def test_frobenius_powers(self) -> None:
        """Test the ^q, ^{q} and ^{q^k} spellings."""
        rel = parse_qpolynomial("x^q + y^{q} + 2*z^{q^3}", GF3)
        assert [t.frob for t in rel] == [1, 1, 3]
        assert rel.text(GF3) == "x^q + y^q - z^{q^3}"

    def test_characteristic_two_signs(self) -> None:
        """Test that minus is plus over GF(2)."""
        assert parse_qpolynomial("alpha - beta", GF2).text(GF2) == "alpha + beta"

    def test_equation_form(self) -> None:
        """Test that lhs = rhs becomes lhs - rhs."""
        rel = parse_qpolynomial("alpha = 2*beta", GF3)
        assert rel.text(GF3) == "alpha + beta"

    def test_merging(self) -> None:
        """Test that repeated terms combine and cancel."""
        assert not parse_qpolynomial("x - x", GF3)
        assert parse_qpolynomial("x + x", GF3).text(GF3) == "-x"

    def test_extension_coefficients(self) -> None:
        """Test GF(p^t) coefficients in relations."""
        rel = parse_qpolynomial("GF(2^2){0,1}*x + y", GF4)
        assert rel.terms[0].coeff == 2

    def test_missing_operator(self) -> None:
        """Test that juxtaposed symbols are rejected."""
        with pytest.raises(PolynomialSyntaxError) as exc_info:
            parse_qpolynomial("alpha beta", GF3)
        assert exc_info.value.error_code == "INVALID_RELATION"

    def test_malformed(self) -> None:
        """Test that stray characters are rejected."""
        with pytest.raises(PolynomialSyntaxError) as exc_info:
            parse_qpolynomial("alpha + ?", GF3)
        assert exc_info.value.error_code == "INVALID_RELATION"

    def test_relation_set(self) -> None:
        """Test symbol order and restriction of relation sets."""
        rels = RelationSet.parse(["alpha - beta", "gamma - delta^q", "0"], GF3)
        assert len(rels) == 2
        assert rels.symbols() == ["alpha", "beta", "gamma", "delta"]
        assert not rels.is_linear
        assert len(rels.restrict(["alpha", "beta"])) == 1
        assert len(rels.without(["delta"])) == 1


class TestClassification:
    """Test cases for the shapes of single relations."""

    def test_proportional_statement(self) -> None:
        """Test x^{q^a} = ν·y^{q^b} detection."""
        assert is_proportional_statement(parse_qpolynomial("alpha - 2*beta^q", GF3))
        assert not is_proportional_statement(parse_qpolynomial("alpha - beta - gamma", GF3))
        assert not is_proportional_statement(parse_qpolynomial("x - x^q", GF3))

    def test_self_relation(self) -> None:
        """Test x = x^{q^s} detection after normalization."""
        assert self_relation_degree(parse_qpolynomial("x - x^{q^2}", GF3), GF3) == 2
        assert self_relation_degree(parse_qpolynomial("x^q - x^{q^3}", GF3), GF3) == 2
        assert self_relation_degree(parse_qpolynomial("x + x^q", GF3), GF3) is None

    def test_shift(self) -> None:
        """Test that shifting below q^0 is refused."""
        rel = parse_qpolynomial("x^q - y", GF3)
        with pytest.raises(PassError) as exc_info:
            rel.shifted(-1)
        assert exc_info.value.error_code == "INVALID_SHIFT"


class TestElimination:
    """Test cases for the solved form of relation systems."""

    def test_linear_pivot(self) -> None:
        """Test that alpha is solved in terms of beta and gamma."""
        rels = RelationSet.parse(["alpha - beta - gamma"], GF3)
        solved = eliminate(rels, GF3, truncation=4)
        assert solved.independent == ("beta", "gamma")
        assert solved.dependent_map()["alpha"].text(GF3) == "beta + gamma"
        assert not solved.truncated

    def test_self_relation_constraint(self) -> None:
        """Test that x = x^q over GF(2) cuts GF(4) down to GF(2)."""
        rels = RelationSet.parse(["x - x^q"], GF2)
        solved = eliminate(rels, GF2, truncation=4, q=2)
        assert solved.self_relations == (("x", 1),)
        assert solved.solutions(GF4) == {(0,), (1,)}

    def test_chained_substitution(self) -> None:
        """Test that later pivots are substituted into earlier solutions."""
        rels = RelationSet.parse(["x - y^q", "y - z"], GF3)
        solved = eliminate(rels, GF3, truncation=4, symbols=["x", "y", "z"])
        assert solved.independent == ("z",)
        assert solved.dependent_map()["x"].text(GF3) == "z^q"

    def test_invalid_truncation(self) -> None:
        """Test that the truncation must be positive."""
        with pytest.raises(PassError) as exc_info:
            eliminate(RelationSet(), GF3, truncation=0)
        assert exc_info.value.error_code == "INVALID_TRUNCATION"

    @pytest.mark.parametrize("fld", [GF2, GF3, GF4], ids=["q=2", "q=3", "q=4"])
    def test_solutions_match_enumeration(self, fld: FieldSpec) -> None:
        """Test the solved form against brute force on fifty seeded systems."""
        rng = random.Random(50 + fld.order)
        for _ in range(50):
            rels = _random_system(rng, fld)
            solved = eliminate(rels, fld, truncation=16, symbols=list(SYMBOLS))
            assert not solved.truncated
            expected = enumerate_solutions(rels, SYMBOLS, fld, fld, fld.order)
            assert solved.solutions(fld) == expected, rels.text_lines(fld)
