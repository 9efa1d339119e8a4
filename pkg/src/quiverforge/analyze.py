"""
Structural analyses of full quivers and their algebras.
"""

from __future__ import annotations

import dataclasses
import logging
import random
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import networkx as nx

from quiverforge.basering import FINITE, Ring, RingElement, document_text
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import (
    BoundExceededError,
    ConfigurationError,
    PassError,
    PolynomialSyntaxError,
    QuiverError,
    RingError,
)
from quiverforge.linalg import EchelonSpace, Matrix
from quiverforge.materialize import (
    GenericElement,
    Materialized,
    algebra_element,
    coefficient_matrices,
    decompress,
    generic_element,
    materialize,
    specialize,
)
from quiverforge.polynomials import Poly, evaluate, parse_polynomial
from quiverforge.quiver import (
    FREE_ENTRIES,
    Arrow,
    Branch,
    FullQuiver,
    branches,
    closure_pairs,
    find_morphism,
    grassmann_quiver,
    imprimitive_pairs,
    induced_subquiver,
    is_convex,
    primitive_arrows,
    reverse,
)
from quiverforge.relations import is_proportional_statement

logger = logging.getLogger(__name__)

ALGEBRA_SUBDIRECT = "algebra-subdirect"
VECTOR_SPACE_ONLY = "vector-space-only"
NEITHER = "neither"

PI_MODES = ("symbolic", "sampled")


def matrix_text(m: Matrix) -> str:
    """Sum of matrix units, e.g. ``e12 + 2·e13``."""
    parts = []
    for (i, j), v in sorted(m.entries):
        unit = f"e{i + 1}{j + 1}" if m.size < 10 else f"e{i + 1},{j + 1}"
        coeff = document_text(v)
        parts.append(unit if coeff == "1" else f"({coeff})·{unit}")
    return " + ".join(parts) or "0"


def _generic_pair(q: FullQuiver, tags: Sequence[str], config: ForgeConfig) -> tuple[
    list[GenericElement], list[Matrix]
]:
    """Independent generic elements over one merged ring."""
    gens = [generic_element(q, tag=tag, config=config) for tag in tags]
    ring = gens[0].ring
    for g in gens[1:]:
        ring = ring.merge(g.ring)
    return gens, [g.matrix.with_ring(ring) for g in gens]


# Commutativity


@dataclass
class CommutativityVerdict:
    """Whether the algebra is commutative, with a noncommuting pair of basis elements if not."""

    commutative: bool
    method: str
    witness: tuple[Matrix, Matrix] | None = None
    criterion: bool | None = None

    def witness_text(self) -> str:
        if self.witness is None:
            return ""
        a, b = (matrix_text(m) for m in self.witness)
        return f"({a})({b}) ≠ ({b})({a})"


def commutativity_criterion(q: FullQuiver) -> bool | None:
    """
    Verdict for quivers without arrow gluing: all vertices identically glued
    scalar blocks and no branch longer than 1. None when arrows are glued.
    """
    if any(a.glue_class is not None for a in q.arrows):
        return None
    first = q.vertices[0]
    same = all(
        q.glued(first, v) and v.twist == first.twist and v.degree == 1 for v in q.vertices
    )
    return same and all(b.length <= 1 for b in branches(q))


def is_commutative(q: FullQuiver, config: ForgeConfig | None = None) -> CommutativityVerdict:
    """
    Check [x, y] = 0 for two independent generic elements.

    For quivers without arrow gluing the branch-length criterion is applied as
    well and compared against the direct check.
    """
    config = config or ForgeConfig()
    flat = decompress(q)
    criterion = commutativity_criterion(flat)
    gens, (x, y) = _generic_pair(flat, ("x", "y"), config)
    commutative = not x.commutator(y)
    method = "generic commutator"
    if criterion is not None:
        method = "branch criterion, cross-checked"
        if criterion != commutative:
            logger.warning(
                f"Quiver {q.name}: branch criterion says {criterion}, generic check {commutative}"
            )
    verdict = CommutativityVerdict(commutative, method, criterion=criterion)
    if not commutative:
        coeffs = coefficient_matrices(gens[0])
        for i, a in enumerate(coeffs):
            partner = next((b for b in coeffs[i + 1 :] if a.commutator(b)), None)
            if partner is not None:
                verdict.witness = (a, partner)
                break
    logger.info(f"Quiver {q.name} is {'commutative' if commutative else 'noncommutative'}")
    return verdict


# Nilpotence and open sandwiches


@dataclass(frozen=True)
class SandwichWitness:
    """Radical elements whose product, of length m − 1, is nonzero."""

    vertex: str
    factors: tuple[Matrix, ...]
    product: Matrix

    @property
    def length(self) -> int:
        return len(self.factors)

    def text(self) -> str:
        return " · ".join(f"({matrix_text(f)})" for f in self.factors)


@dataclass
class NilpotenceReport:
    index: int
    witness: SandwichWitness | None
    max_branch_length: int

    @property
    def canonical(self) -> bool:
        """Whether the longest branch realises the nilpotence index."""
        return self.max_branch_length == self.index - 1

    @property
    def exceeds(self) -> bool:
        return self.max_branch_length > self.index - 1


def sandwich_search(mat: Materialized, bound: int = 4096) -> SandwichWitness | None:
    """
    Depth-first search for m − 1 radical basis elements with a nonzero product.

    Raises:
        BoundExceededError: If more than ``bound`` partial products are tried.
    """
    radical = mat.filtration.radical
    length = mat.nilpotence_index - 1
    if radical is None or length < 1:
        return None
    basis = radical.basis
    tried = 0

    def dfs(prefix: list[Matrix], product: Matrix | None) -> tuple[list[Matrix], Matrix] | None:
        nonlocal tried
        if len(prefix) == length and product is not None:
            return prefix, product
        for b in basis:
            tried += 1
            if tried > bound:
                raise BoundExceededError(
                    f"Open-sandwich search tried more than {bound} products", "SANDWICH_TOO_LARGE"
                )
            nxt = b if product is None else product.matmul(b)
            if not nxt:
                continue
            found = dfs([*prefix, b], nxt)
            if found is not None:
                return found
        return None

    found = dfs([], None)
    if found is None:
        return None
    factors, product = found
    row = min(i for (i, _), _ in product.entries)
    return SandwichWitness(mat.layout.owner(row), tuple(factors), product)


def check_open_sandwich(mat: Materialized, witness: SandwichWitness) -> bool:
    """Recompute the witness: radical factors, length m − 1, nonzero product."""
    radical = mat.filtration.radical
    if radical is None or witness.length != mat.nilpotence_index - 1:
        return False
    if not all(radical.contains(f) for f in witness.factors):
        return False
    product = witness.factors[0]
    for f in witness.factors[1:]:
        product = product.matmul(f)
    return bool(product) and product == witness.product


def nilpotence_index(q: FullQuiver, config: ForgeConfig | None = None) -> NilpotenceReport:
    """Index of nilpotence of the radical, an open sandwich realising it, and the longest branch."""
    config = config or ForgeConfig()
    mat = materialize(q, config)
    witness = sandwich_search(mat, config.span_bound)
    longest = max((b.length for b in branches(mat.quiver)), default=0)
    report = NilpotenceReport(mat.nilpotence_index, witness, longest)
    if report.exceeds:
        logger.info(
            f"Quiver {q.name}: branch of length {longest} exceeds m - 1 = {report.index - 1}; "
            "not in canonical form"
        )
    return report


# Pseudo-quivers


@dataclass
class PseudoQuiver:
    """A full quiver with quasi-linear vertex gluing recorded as base changes."""

    quiver: FullQuiver
    vertex_relations: tuple[str, ...] = ()
    independent: bool = True
    skipped: tuple[str, ...] = ()


def _heights(q: FullQuiver) -> dict[str, int]:
    g = q.graph()
    height: dict[str, int] = {}
    for v in reversed(list(nx.topological_sort(g))):
        height[v] = max((height[w] + 1 for w in g.successors(v)), default=0)
    return height


def _dependent_pair(
    q: FullQuiver, s: str, done: set[frozenset[str]]
) -> tuple[Arrow, Arrow] | None:
    """Two out-arrows of s in one class, same exponent, into identically glued vertices."""
    outs = q.out_arrows(s)
    for i, a in enumerate(outs):
        for b in outs[i + 1 :]:
            if a.glue_class is None or a.glue_class != b.glue_class or a.exponent != b.exponent:
                continue
            t1, t2 = q.vertex(a.dst), q.vertex(b.dst)
            if q.glued(t1, t2) and t1.twist == t2.twist and frozenset((t1.id, t2.id)) not in done:
                return a, b
    return None


def _base_change(q: FullQuiver, t1: str, t2: str, r: RingElement) -> FullQuiver | str:
    """
    Replace e_{t2} by e_{t2} − r·e_{t1}: arrows out of t1 gain r times those
    out of t2, arrows into t2 lose r times those into t1. Free entries absorb
    any change. Returns the new quiver or the reason it cannot be expressed.
    """
    reach = closure_pairs(q)
    free = q.imprimitive == FREE_ENTRIES
    changed: dict[str, Arrow | None] = {}
    added: list[Arrow] = []

    def combine(
        target: Arrow | None, source: Arrow, factor: RingElement, pos: tuple[str, str]
    ) -> str:
        if target is not None and target.glue_class is None:
            return ""
        if source.glue_class is None:
            if target is None and free and pos in reach:
                return ""
            return f"free entry {source.id} cannot be moved onto {pos[0]}→{pos[1]}"
        if target is None:
            if free and pos in reach:
                return ""
            nu = q.nu(source) * factor
            added.append(
                Arrow(f"{source.id}'", pos[0], pos[1], source.glue_class, nu, source.exponent)
            )
            return ""
        if target.glue_class != source.glue_class or target.exponent != source.exponent:
            return f"arrows {target.id} and {source.id} are not proportionally glued"
        nu = q.nu(target) + q.nu(source) * factor
        if not nu:
            changed[target.id] = None
        else:
            changed[target.id] = dataclasses.replace(target, nu=None if nu == nu.ring.one else nu)
        return ""

    out1 = {a.dst: a for a in q.out_arrows(t1)}
    for b in q.out_arrows(t2):
        reason = combine(out1.get(b.dst), b, r, (t1, b.dst))
        if reason:
            return reason
    in2 = {a.src: a for a in q.in_arrows(t2)}
    for a in q.in_arrows(t1):
        reason = combine(in2.get(a.src), a, -r, (a.src, t2))
        if reason:
            return reason
    arrows = [changed.get(a.id, a) for a in q.arrows]
    kept = tuple(a for a in arrows if a is not None)
    return q.replace(arrows=kept + tuple(added))


def _merge_level(
    q: FullQuiver,
    rank: dict[str, int],
    done: set[frozenset[str]],
    relations: list[str],
    skipped: list[str],
) -> FullQuiver:
    height = _heights(q)
    for s in sorted(height, key=lambda v: (-height[v], rank[v])):
        while (pair := _dependent_pair(q, s, done)) is not None:
            a, b = pair
            done.add(frozenset((a.dst, b.dst)))
            try:
                r = q.nu(b) * q.nu(a).inverse()
            except RingError:
                skipped.append(f"{a.id},{b.id}: label {q.nu(a)} is not invertible")
                continue
            changed = _base_change(q, a.dst, b.dst, r)
            if isinstance(changed, str):
                skipped.append(f"{a.id},{b.id}: {changed}")
                continue
            q = changed
            relations.append(f"{b.dst}' = {b.dst} - ({document_text(r)})·{a.dst}")
            logger.info(f"Base change at {s}: {relations[-1]}")
    return q


def pseudo_quiver_form(q: FullQuiver) -> PseudoQuiver:
    """
    Merge proportionally glued arrows sharing a source, then a target, by
    base changes within glued vertex pairs.

    Sources are processed from the highest level down; each glued vertex pair
    is changed at most once. Pairs that cannot be merged (Frobenius-twisted,
    non-invertible labels, or already used) leave the independence flag unset.

    Raises:
        PassError: If the relations are not all proportional statements.
    """
    if not all(is_proportional_statement(r) for r in q.relations):
        raise PassError(
            f"Quiver {q.name} has non-proportional relations; proportionalize first",
            "NOT_PROPORTIONAL",
        )
    rank = dict(q.index)
    done: set[frozenset[str]] = set()
    relations: list[str] = []
    skipped: list[str] = []
    current = _merge_level(q, rank, done, relations, skipped)
    flipped = _merge_level(reverse(current), rank, done, relations, skipped)
    current = reverse(flipped).replace(name=q.name)

    def remaining(x: FullQuiver) -> list[str]:
        return [
            f"{p[0].id},{p[1].id}"
            for s in (v.id for v in x.vertices)
            if (p := _dependent_pair(x, s, set())) is not None
        ]

    left = remaining(current) + remaining(reverse(current))
    for item in left:
        if not any(item in s for s in skipped):
            skipped.append(f"{item}: still dependent")
    return PseudoQuiver(current, tuple(relations), not left, tuple(skipped))


# Corners and subdirect covers


@dataclass
class CornerReport:
    convex: bool
    corner: FullQuiver | None = None
    multiplicative: bool | None = None


def convex_corner(
    q: FullQuiver, subset: Iterable[str], config: ForgeConfig | None = None
) -> CornerReport:
    """
    The corner eAe of a vertex subset, with a check that a ↦ eae is multiplicative.

    Raises:
        QuiverError: On unknown vertices.
    """
    config = config or ForgeConfig()
    flat = decompress(q)
    members = set(subset)
    unknown = members - set(flat.index)
    if unknown:
        raise QuiverError(f"Unknown vertices {sorted(unknown)}", "UNKNOWN_VERTEX")
    if not is_convex(flat, members):
        logger.info(f"Vertex set {sorted(members)} of {q.name} is not convex")
        return CornerReport(False)
    corner = induced_subquiver(flat, members)
    gens, (x, y) = _generic_pair(flat, ("x", "y"), config)
    lay = gens[0].layout

    def keep(i: int, j: int) -> bool:
        return lay.owner(i) in members and lay.owner(j) in members

    ex, ey = x.restrict(keep), y.restrict(keep)
    multiplicative = x.matmul(y).restrict(keep) == ex.matmul(ey)
    return CornerReport(True, corner, multiplicative)


@dataclass(frozen=True)
class Cover:
    """A vertex subset, optionally with an explicit arrow subset."""

    vertices: tuple[str, ...]
    arrows: tuple[str, ...] | None = None
    name: str = ""


@dataclass
class CoverVerdict:
    verdict: str
    witness: str = ""
    dimensions: dict[str, int] = field(default_factory=dict)


def _cover_positions(q: FullQuiver, cover: Cover) -> set[tuple[str, str]]:
    """Diagonal blocks, arrows, and imprimitive entries all of whose paths stay in the cover."""
    verts = set(cover.vertices)
    if cover.arrows is None:
        edges = {(a.src, a.dst) for a in q.arrows if a.src in verts and a.dst in verts}
    else:
        edges = {(q.arrow(x).src, q.arrow(x).dst) for x in cover.arrows}
    keep = {(v, v) for v in verts} | edges
    g = q.graph()
    for s, d in imprimitive_pairs(q):
        if s in verts and d in verts:
            paths = nx.all_simple_paths(g, s, d)
            if all(all(e in edges for e in nx.utils.pairwise(p)) for p in paths):
                keep.add((s, d))
    return keep


def subdirect_cover_check(
    q: FullQuiver, covers: Sequence[Cover | Iterable[str]], config: ForgeConfig | None = None
) -> CoverVerdict:
    """
    Decide whether A is a subdirect product of the algebras of the covers.

    A embeds as a vector space when no element vanishes on every cover; it
    is an algebra subdirect product when in addition each projection maps
    every radical power of A onto the radical power of the cover's algebra.

    Raises:
        QuiverError: On a compressed quiver, unknown vertices, a non-convex
            vertex cover or covers missing a vertex.
    """
    config = config or ForgeConfig()
    if any(v.infinitesimals for v in q.vertices):
        raise QuiverError(f"Decompress {q.name} before checking covers", "COMPRESSED_COVER")
    parts = [c if isinstance(c, Cover) else Cover(tuple(c)) for c in covers]
    for k, c in enumerate(parts, start=1):
        unknown = set(c.vertices) - set(q.index)
        if unknown:
            raise QuiverError(f"Cover {k} has unknown vertices {sorted(unknown)}", "UNKNOWN_VERTEX")
        if c.arrows is None and not is_convex(q, c.vertices):
            raise QuiverError(f"Cover {k} is not convex", "NON_CONVEX_COVER")
    missing = set(q.index) - {v for c in parts for v in c.vertices}
    if missing:
        raise QuiverError(f"Covers miss vertices {sorted(missing)}", "INCOMPLETE_COVER")

    mat = materialize(q, config)
    lay = mat.layout
    fld = q.field
    positions = [_cover_positions(q, c) for c in parts]

    def project(m: Matrix, keep: set[tuple[str, str]]) -> Matrix:
        return m.restrict(lambda i, j: (lay.owner(i), lay.owner(j)) in keep)

    def span(ms: Iterable[Matrix]) -> int:
        space = EchelonSpace(fld, lay.size, mat.basis.space.ring)
        space.extend(ms)
        return space.dimension

    dims = {"A": mat.dimension}
    union = set().union(*positions)
    image = span(project(b, union) for b in mat.basis.basis)
    if image < mat.dimension:
        witness = f"{mat.dimension - image} dimension(s) of A vanish on every cover"
        logger.info(f"Quiver {q.name}: {witness}")
        return CoverVerdict(NEITHER, witness, dims)

    powers_a = mat.filtration.spaces
    witness = ""
    for k, (c, keep) in enumerate(zip(parts, positions, strict=True), start=1):
        name = c.name or f"cover{k}"
        sub = materialize(induced_subquiver(q, c.vertices, c.arrows, name), config)
        dims[name] = sub.dimension
        own = [span(project(b, keep) for b in mat.basis.basis)]
        own += [span(project(b, keep) for b in s.basis) for s in powers_a]
        theirs = [sub.dimension] + sub.filtration.dimensions
        depth = max(len(own), len(theirs))
        own += [0] * (depth - len(own))
        theirs += [0] * (depth - len(theirs))
        if own == theirs:
            continue
        vanishing = [p for p in range(1, depth) if own[p] == 0 and theirs[p] > 0]
        if vanishing:
            p = vanishing[0]
            text = f"J^{p}(A) maps to 0 but J^{p}({name}) ≠ 0"
            if p > len(powers_a):
                text = f"J^{p}(A) = 0 but J^{p}({name}) ≠ 0"
        else:
            p = next(i for i in range(depth) if own[i] != theirs[i])
            what = "A" if p == 0 else f"J^{p}(A)"
            text = f"projection of {what} has dimension {own[p]}, {name} needs {theirs[p]}"
        witness = witness or text
    verdict = VECTOR_SPACE_ONLY if witness else ALGEBRA_SUBDIRECT
    logger.info(f"Quiver {q.name}: {verdict} {witness}".rstrip())
    return CoverVerdict(verdict, witness, dims)


# Branch gluing


GLUING_KINDS = ("none", "partial", "total", "permuted", "degenerate")


@dataclass(frozen=True)
class BranchPairGluing:
    first: Branch
    second: Branch
    kind: str


@dataclass
class BranchGluingReport:
    pairs: list[BranchPairGluing]
    complete: bool
    cube_dimension: int | None = None
    cube_embedding: dict[str, str] | None = None

    def kinds(self) -> Counter[str]:
        return Counter(p.kind for p in self.pairs)


def _gluing_keys(q: FullQuiver, b: Branch) -> list[tuple[str, int] | None]:
    keys: list[tuple[str, int] | None] = []
    for x in b.arrows:
        a = q.arrow(x)
        keys.append(None if a.glue_class is None else (a.glue_class, a.exponent))
    return keys


def _pair_kind(q: FullQuiver, b1: Branch, b2: Branch) -> str:
    k1, k2 = _gluing_keys(q, b1), _gluing_keys(q, b2)
    s1, s2 = {k for k in k1 if k}, {k for k in k2 if k}
    if not s1 & s2:
        return "none"
    total = (None not in k1 and set(k1) <= s2) or (None not in k2 and set(k2) <= s1)
    if not total:
        return "partial"
    if k1 == k2:
        return "degenerate"
    if len(k1) == len(k2) and Counter(k1) == Counter(k2):
        return "permuted"
    return "total"


def classify_branch_gluing(q: FullQuiver) -> BranchGluingReport:
    """
    Classify every pair of branches and test for complete gluing.

    Complete gluing means every primitive arrow is glued to the initial
    arrow of some branch; then the quiver must embed into the glued cube
    on that many generators.
    """
    found = branches(q)
    pairs = [
        BranchPairGluing(b1, b2, _pair_kind(q, b1, b2))
        for i, b1 in enumerate(found)
        for b2 in found[i + 1 :]
    ]
    primitive, erased = primitive_arrows(q)
    initial = {q.arrow(b.arrows[0]).glue_class for b in found if b.arrows}
    complete = bool(found) and all(
        q.arrow(x).glue_class is not None and q.arrow(x).glue_class in initial for x in primitive
    )
    report = BranchGluingReport(pairs, complete)
    if complete and max(b.length for b in found) > 1:
        m = len(initial)
        unital = not any(v.zero for v in q.vertices)
        cube = grassmann_quiver(m, unital=unital, base=None if q.infinite else q.field)
        report.cube_dimension = m
        report.cube_embedding = find_morphism(erased, cube)
        if report.cube_embedding is None:
            logger.warning(
                f"Quiver {q.name} is completely glued but does not embed in the {m}-cube"
            )
    return report


# Polynomial identities


@dataclass
class PIVerdict:
    holds: bool
    mode: str
    polynomial: str
    counterexample: dict[str, object] | None = None


def _subfield_values(order: int, fld_elements: Sequence[int], power: object) -> list[int]:
    return [a for a in fld_elements if power(a, order) == a]  # type: ignore[operator]


def pi_check(
    q: FullQuiver,
    poly: str | Poly,
    mode: str = "symbolic",
    config: ForgeConfig | None = None,
) -> PIVerdict:
    """
    Test a polynomial identity on the algebra of q.

    Each variable becomes an independent generic element of the whole
    algebra (see ``algebra_element``). Symbolic mode evaluates on those and
    is exact; sampled mode evaluates at ``config.trials`` random points.

    Raises:
        BoundExceededError: If the degree exceeds ``config.pi_degree_bound``.
        PolynomialSyntaxError: On a malformed polynomial, or Frobenius powers over K.
        ConfigurationError: On an unknown mode.
    """
    config = config or ForgeConfig()
    if mode not in PI_MODES:
        raise ConfigurationError(
            f"PI mode must be one of {PI_MODES}, got: {mode}", "INVALID_PI_MODE"
        )
    p = parse_polynomial(poly) if isinstance(poly, str) else poly
    if p.degree > config.pi_degree_bound:
        raise BoundExceededError(
            f"Polynomial degree {p.degree} exceeds the bound {config.pi_degree_bound}",
            "DEGREE_TOO_LARGE",
        )
    if q.infinite and "^{q^" in str(p):
        raise PolynomialSyntaxError("Frobenius powers need a finite base", "FROBENIUS_OVER_K")
    mat = materialize(q, config)
    indices = sorted(p.variables())
    gens = [algebra_element(mat, f"x{k}") for k in indices]
    ring = gens[0].ring if gens else mat.basis.space.ring
    for g in gens[1:]:
        ring = ring.merge(g.ring)
    size = mat.layout.size
    fld, qq = ring.field, mat.quiver.q
    if mode == "symbolic":
        mats = [g.matrix.with_ring(ring) for g in gens]
        result = evaluate(p, dict(zip(indices, mats, strict=True)), fld, ring, size, qq)
        verdict = PIVerdict(not result, mode, str(p))
        if result:
            (i, j), value = min(result.entries)
            verdict.counterexample = {"entry": f"e{i + 1}{j + 1}", "value": document_text(value)}
        logger.info(f"PI {p} on {q.name}: {'holds' if verdict.holds else 'fails'} ({mode})")
        return verdict

    rng = random.Random(config.seed)
    cache: dict[int, list[int]] = {}
    for trial in range(config.trials):
        assignment: dict[str, int] = {}
        values = {}
        for k, g in zip(indices, gens, strict=True):
            for sym in g.symbols:
                if sym.kind == FINITE:
                    if sym.order not in cache:
                        cache[sym.order] = _subfield_values(sym.order, fld.elements(), fld.power)
                    assignment[sym.name] = rng.choice(cache[sym.order])
                else:
                    assignment[sym.name] = rng.randrange(fld.order)
            values[k] = specialize(g, assignment)
        point = next(iter(values.values())).ring if values else Ring(fld)
        values = {k: m.with_ring(point) for k, m in values.items()}
        result = evaluate(p, values, fld, point, size, qq)
        if result:
            logger.info(f"PI {p} on {q.name}: fails at trial {trial + 1}")
            return PIVerdict(False, mode, str(p), {"trial": trial + 1, "assignment": assignment})
    logger.info(f"PI {p} on {q.name}: holds on {config.trials} samples")
    return PIVerdict(True, mode, str(p))
