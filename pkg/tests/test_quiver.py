"""Tests for the full-quiver data model."""

from collections.abc import Callable

import pytest

from quiverforge.basering import make_field
from quiverforge.exceptions import QuiverError
from quiverforge.quiver import (
    Arrow,
    FullQuiver,
    Vertex,
    branches,
    classical_quiver,
    elementary_quiver,
    embeddable,
    find_morphism,
    glue_connected_components,
    glued_triangle,
    grassmann_quiver,
    imprimitive_pairs,
    is_convex,
    morita_shrink,
    path_quiver,
    primitive_arrows,
    radical_power_quiver,
    reverse,
    transitive_arrows,
    validate,
)

GF2 = make_field(2, 1)

MUTATIONS = {
    "invalid-loop": "loop",
    "invalid-double": "duplicate_arrow",
    "invalid-cycle": "cycle",
    "invalid-twist-range": "twist_range",
    "invalid-infinite-twist": "infinite_twist",
    "invalid-zero-class": "zero_class",
    "invalid-class-mismatch": "class_mismatch",
    "invalid-p2p": "p2p",
    "invalid-arrow-twist": "arrow_twist",
    "invalid-arrow-exponent": "arrow_exponent",
    "invalid-diagonal-exponent": "diagonal_exponent",
    "invalid-cocycle": "cocycle",
    "invalid-relation-symbol": "relation_symbol",
    "invalid-field-degree": "degree",
}


class TestValidate:
    """Test cases for structural validation."""

    @pytest.mark.parametrize("name,kind", sorted(MUTATIONS.items()))
    def test_mutation_is_reported(
        self, fixture_quiver: Callable[[str], FullQuiver], name: str, kind: str
    ) -> None:
        """Test that each broken fixture reports its violation kind."""
        report = validate(fixture_quiver(name))
        assert not report.ok
        assert kind in report.kinds

    def test_raise_for_violations(self, fixture_quiver: Callable[[str], FullQuiver]) -> None:
        """Test that the first violation becomes the error code."""
        report = validate(fixture_quiver("invalid-loop"))
        with pytest.raises(QuiverError) as exc_info:
            report.raise_for_violations()
        assert exc_info.value.error_code == "INVALID_LOOP"

    @pytest.mark.parametrize("name", ["E1", "E3", "grassmann3", "ladder-twin", "EG2"])
    def test_valid_fixtures(self, fixture_quiver: Callable[[str], FullQuiver], name: str) -> None:
        """Test that well-formed fixtures pass."""
        report = validate(fixture_quiver(name))
        assert report.ok, [v.message for v in report.violations]

    def test_unknown_endpoint(self) -> None:
        """Test that arrows must join known vertices."""
        q = FullQuiver("bad", GF2, (Vertex("v1"),), (Arrow("a1", "v1", "v9"),))
        assert validate(q).kinds == {"unknown_vertex"}


class TestBuilders:
    """Test cases for the named quiver families."""

    def test_glued_triangle(self) -> None:
        """Test I(3): three glued vertices and arrows glued by length."""
        q = glued_triangle(3)
        assert validate(q).ok
        assert q.infinite
        assert len(q.vertices) == 3
        assert {cls: len(arrs) for cls, arrs in q.arrow_classes().items()} == {
            "lambda1": 2,
            "lambda2": 1,
        }

    def test_glued_triangle_length(self) -> None:
        """Test that the length must be positive."""
        with pytest.raises(QuiverError) as exc_info:
            glued_triangle(0)
        assert exc_info.value.error_code == "INVALID_TRIANGLE"

    def test_grassmann_signs(self) -> None:
        """Test that exactly one edge of the square carries a sign."""
        q = grassmann_quiver(2)
        assert q.name == "G2+"
        assert validate(q).ok
        assert len(q.vertices) == 4
        signed = [a for a in q.arrows if a.nu is not None]
        assert [a.id for a in signed] == ["v10_beta"]
        assert signed[0].nu == signed[0].nu.ring.constant(-1)

    def test_grassmann_radical_form(self) -> None:
        """Test that the radical form uses zero vertices."""
        q = grassmann_quiver(3, unital=False)
        assert all(v.zero for v in q.vertices)
        assert len(q.arrows) == 12
        assert validate(q).ok

    def test_grassmann_range(self) -> None:
        """Test that m must be positive."""
        with pytest.raises(QuiverError) as exc_info:
            grassmann_quiver(0)
        assert exc_info.value.error_code == "INVALID_GRASSMANN"

    def test_elementary_twist(self) -> None:
        """Test E3 over GF(2) with a Frobenius twist."""
        q = elementary_quiver("E3", t1=2, u=3, base=GF2)
        assert q.vertices[1].twist == 1
        assert validate(q).ok

    def test_elementary_errors(self) -> None:
        """Test twists over K and unknown kinds."""
        with pytest.raises(QuiverError) as exc_info:
            elementary_quiver("E3")
        assert exc_info.value.error_code == "INFINITE_TWIST"
        with pytest.raises(QuiverError) as exc_info:
            elementary_quiver("E9")
        assert exc_info.value.error_code == "UNKNOWN_ELEMENTARY"


class TestGraphOperations:
    """Test cases for paths, branches and sub-quivers."""

    def test_primitive_arrows(self) -> None:
        """Test that the long unglued arrow of I(3) is erased."""
        primitive, erased = primitive_arrows(glued_triangle(3))
        assert primitive == {"a12", "a23"}
        assert [a.id for a in erased.arrows] == ["a12", "a23"]

    def test_branches(self) -> None:
        """Test the maximal primitive path of I(3)."""
        found = branches(glued_triangle(3))
        assert len(found) == 1
        assert found[0].vertices == ("v1", "v2", "v3")
        assert found[0].length == 2

    def test_imprimitive_pairs(self) -> None:
        """Test that a path of length two has one imprimitive pair."""
        q = path_quiver("p", [None, None, None], [None, None])
        assert imprimitive_pairs(q) == [("v1", "v3")]
        closed = transitive_arrows(q)
        assert closed.arrow_between("v1", "v3") is not None

    def test_convexity(self) -> None:
        """Test that skipping the middle of a path is not convex."""
        q = path_quiver("p", [None, None, None], [None, None])
        assert is_convex(q, ["v1", "v2"])
        assert not is_convex(q, ["v1", "v3"])

    def test_reverse(self) -> None:
        """Test that the opposite quiver turns every arrow around."""
        q = reverse(path_quiver("p", [None, None], [None]))
        assert q.name == "p^op"
        assert [v.id for v in q.vertices] == ["v2", "v1"]
        assert (q.arrows[0].src, q.arrows[0].dst) == ("v2", "v1")
        assert validate(q).ok

    def test_glue_components(self) -> None:
        """Test that gluing joins otherwise disconnected vertices."""
        q = FullQuiver(
            "c",
            GF2,
            (Vertex("v1", "I"), Vertex("v2"), Vertex("v3", "I"), Vertex("v4")),
            (Arrow("a1", "v1", "v2"),),
        )
        assert glue_connected_components(q) == [["v1", "v2", "v3"], ["v4"]]

    def test_radical_power(self) -> None:
        """Test that J^2 of a zero path joins its ends."""
        q = path_quiver("z", [None, None, None], [None, None], zero=True)
        squared = radical_power_quiver(q, 2)
        assert [(a.src, a.dst) for a in squared.arrows] == [("v1", "v3")]
        with pytest.raises(QuiverError) as exc_info:
            radical_power_quiver(q, 0)
        assert exc_info.value.error_code == "INVALID_POWER"

    def test_lookup_errors(self) -> None:
        """Test unknown vertex and arrow lookups."""
        q = glued_triangle(2)
        with pytest.raises(QuiverError) as exc_info:
            q.vertex("v9")
        assert exc_info.value.error_code == "UNKNOWN_VERTEX"
        with pytest.raises(QuiverError) as exc_info:
            q.arrow("a99")
        assert exc_info.value.error_code == "UNKNOWN_ARROW"


class TestClassical:
    """Test cases for the classical quiver."""

    def test_triangle_collapses(self) -> None:
        """Test that I(3) becomes one vertex with two loops."""
        classical = classical_quiver(glued_triangle(3))
        assert classical.vertices == ("I",)
        assert classical.multiplicity("I", "I") == 2
        assert not classical.best_effort

    def test_finite_base_is_best_effort(self) -> None:
        """Test the best-effort flag over GF(q)."""
        classical = classical_quiver(path_quiver("p", [None, None], [None], base=GF2))
        assert classical.best_effort
        assert classical.arrow_count == 1


class TestMorphisms:
    """Test cases for embeddings and sub-quiver morphisms."""

    def test_embeddable(self) -> None:
        """Test the corner criterion n·lcm(t, t')/t' ≤ n'."""
        small = Vertex("a", None, 1, 2)
        assert embeddable(small, Vertex("b", None, 2, 1))
        assert embeddable(small, Vertex("b", None, 2, 1), unital=True)
        assert not embeddable(small, Vertex("b", None, 1, 1))
        assert not embeddable(Vertex("k", None, 1, None), Vertex("b", None, 4, 1))
        assert embeddable(small, Vertex("k", None, 1, None))

    def test_identity_morphism(self) -> None:
        """Test that a quiver maps to itself by the identity."""
        q = grassmann_quiver(2)
        assert find_morphism(q, q) == {v.id: v.id for v in q.vertices}

    def test_no_morphism(self) -> None:
        """Test that a longer path does not map into a shorter one."""
        long_path = path_quiver("l", [None, None, None], [None, None])
        short_path = path_quiver("s", [None, None], [None])
        assert find_morphism(long_path, short_path) is None

    def test_morita_shrink(self) -> None:
        """Test that matrix degrees drop to one."""
        q = morita_shrink(elementary_quiver("E1", m=2, n=3))
        assert [v.degree for v in q.vertices] == [1, 1]


class TestLabels:
    """Test cases for vertex and arrow labels."""

    def test_vertex_labels(self) -> None:
        """Test class, shape and twist in labels."""
        assert Vertex("v", "I", 2, 3, twist=1).label() == "I₍2,3₎^(1)"
        assert Vertex("v", None, 1, None, zero=True).label() == "∘₍1,K₎"

    def test_arrow_label(self) -> None:
        """Test the Frobenius exponent in arrow labels."""
        assert Arrow("a", "v1", "v2", "alpha", exponent=2).label() == "alpha^{q^2}"
