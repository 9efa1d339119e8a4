"""
From full quivers to concrete matrix algebras.

A full quiver is read as a block-triangular matrix algebra: one symbolic
block per vertex glue class, one symbolic rectangle per arrow class, and
(for the "free" semantics) one unglued rectangle per imprimitive pair. The
generic element collects all of them; its coefficient matrices span the
algebra over K, and the span closure under products gives a basis from
which the radical filtration is read off.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from quiverforge.basering import (
    FINITE,
    FREE,
    NILPOTENT,
    ONE,
    FieldSpec,
    Indeterminate,
    Monomial,
    Ring,
    RingElement,
    embed_scalar,
    frobenius,
    make_field,
)
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import BoundExceededError, QuiverError, RingError
from quiverforge.linalg import CoordinateKey, Coordinates, EchelonSpace, Matrix, null_space
from quiverforge.quiver import (
    FREE_ENTRIES,
    Arrow,
    FullQuiver,
    Vertex,
    imprimitive_pairs,
    topological_order,
)
from quiverforge.relations import eliminate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockLayout:
    """Vertex blocks in topological order, with their sizes."""

    ids: tuple[str, ...]
    sizes: tuple[int, ...]

    @functools.cached_property
    def offsets(self) -> dict[str, int]:
        out, pos = {}, 0
        for vid, n in zip(self.ids, self.sizes, strict=True):
            out[vid] = pos
            pos += n
        return out

    @property
    def size(self) -> int:
        return sum(self.sizes)

    def block(self, vid: str) -> range:
        start = self.offsets[vid]
        return range(start, start + self.sizes[self.ids.index(vid)])

    def owner(self, index: int) -> str:
        """The vertex whose block contains a row or column index."""
        for vid in self.ids:
            if index in self.block(vid):
                return vid
        raise QuiverError(f"Index {index} lies outside the layout", "INVALID_INDEX")

    def diagonal(self, i: int, j: int) -> bool:
        return self.owner(i) == self.owner(j)

    def rectangle(self, m: Matrix, src: str, dst: str) -> list[list[RingElement]]:
        return [[m.get(i, j) for j in self.block(dst)] for i in self.block(src)]


def layout(q: FullQuiver) -> BlockLayout:
    """Block layout of the decompressed quiver."""
    flat = decompress(q)
    order = topological_order(flat)
    return BlockLayout(tuple(order), tuple(flat.vertex(v).degree for v in order))


# Decompression


def decompress(q: FullQuiver) -> FullQuiver:
    """
    Replace every compressed vertex by a glued triangle of ordinary vertices.

    One infinitesimal level is undone at a time. Copies are joined by ladder
    arrows glued along each diagonal; an arrow between two vertices
    compressed together becomes the upper-triangular Toeplitz family starting
    at its shift, any other arrow touching a compressed vertex is copied to
    every position pair.
    """
    while any(v.infinitesimals for v in q.vertices):
        q = _decompress_level(q)
    return q


def _decompress_level(q: FullQuiver) -> FullQuiver:
    copies: dict[str, list[str]] = {}
    verts: list[Vertex] = []
    arrows: list[Arrow] = []
    for v in q.vertices:
        if not v.infinitesimals:
            copies[v.id] = [v.id]
            verts.append(v)
            continue
        ell, level = v.infinitesimals[-1], len(v.infinitesimals)
        cls = v.glue_class or v.id
        ids = [f"{v.id}.{i}" for i in range(1, ell + 1)]
        copies[v.id] = ids
        verts.extend(
            dataclasses.replace(v, id=vid, glue_class=cls, infinitesimals=v.infinitesimals[:-1])
            for vid in ids
        )
        for i in range(ell):
            for j in range(i + 1, ell):
                arrows.append(
                    Arrow(
                        f"{v.id}.eps.{i + 1}.{j + 1}",
                        ids[i],
                        ids[j],
                        f"{cls}.eps{level}.{j - i}",
                        exponent=v.twist,
                    )
                )

    for a in q.arrows:
        sources, targets = copies[a.src], copies[a.dst]
        if len(sources) == 1 and len(targets) == 1:
            arrows.append(a)
            continue
        s, t = q.vertex(a.src), q.vertex(a.dst)
        cls = a.glue_class or a.id
        toeplitz = (
            len(sources) > 1
            and s.glue_class is not None
            and s.glue_class == t.glue_class
            and s.infinitesimals == t.infinitesimals
        )
        for i, src in enumerate(sources):
            for j, dst in enumerate(targets):
                if toeplitz:
                    d = j - i
                    if d < a.shift:
                        continue
                    klass = cls if d == a.shift else f"{cls}+{d - a.shift}"
                else:
                    klass = cls
                arrows.append(
                    Arrow(f"{a.id}.{i + 1}.{j + 1}", src, dst, klass, a.nu, a.exponent)
                )

    pairs = []
    for r, s, ell in q.frobenius_pairs:
        rs, ss = copies[r], copies[s]
        if len(rs) == len(ss):
            pairs.extend((x, y, ell) for x, y in zip(rs, ss, strict=True))
    logger.debug(f"Decompressed one level of {q.name}: {len(q.vertices)} -> {len(verts)} vertices")
    return q.replace(vertices=tuple(verts), arrows=tuple(arrows), frobenius_pairs=tuple(pairs))


# Generic elements


@dataclass(frozen=True)
class GenericElement:
    """
    The generic element of a full quiver.

    ``ring`` adjoins the generic symbols to the coefficient ring; ``parameters``
    records the random values substituted for free parameters in ν labels,
    which makes every downstream result probabilistic.
    """

    matrix: Matrix
    layout: BlockLayout
    ring: Ring
    symbols: tuple[Indeterminate, ...]
    parameters: tuple[tuple[str, int], ...] = ()

    @property
    def probabilistic(self) -> bool:
        return bool(self.parameters)

    def symbol(self, name: str) -> Indeterminate:
        for s in self.symbols:
            if s.name == name:
                return s
        raise RingError(f"No generic symbol {name!r}", "UNKNOWN_SYMBOL")


def _symbol_kind(q: FullQuiver, degrees: Sequence[int | None]) -> tuple[str, int]:
    if q.infinite or any(t is None for t in degrees):
        return FREE, 0
    return FINITE, q.q ** math.lcm(*[t for t in degrees if t is not None])


def _symbol_block(
    tag: str, key: str, rows: int, cols: int, kind: str, order: int
) -> list[list[Indeterminate]]:
    return [
        [Indeterminate(f"{tag}:{key}[{i},{j}]", kind, order, generic=True) for j in range(cols)]
        for i in range(rows)
    ]


def _parameter_values(q: FullQuiver, config: ForgeConfig) -> dict[str, int]:
    known = {g.name for g in q.coeff_ring.gens}
    names = sorted(
        {v.name for a in q.arrows if a.nu is not None for v in a.nu.variables()} - known
    )
    if not names:
        return {}
    rng = random.Random(config.seed)
    values = {name: rng.randrange(1, q.field.order) for name in names}
    logger.warning(f"Quiver {q.name}: free parameters {names} sampled at random")
    return values


def generic_element(
    q: FullQuiver, tag: str = "x", config: ForgeConfig | None = None
) -> GenericElement:
    """
    Build the generic element of q (decompressed first).

    Vertex classes get finite symbols of order q^t (free ones over K), arrow
    classes get symbols of order q^{lcm(t_r, t_s)}; each block or rectangle
    is the class symbol raised by the member's twist or exponent and scaled
    by ν. Linear and Frobenius-linear relations are solved first: dependent
    classes are expressed entrywise through independent ones, self-relations
    x = x^{q^s} shrink the symbol's field.

    Raises:
        QuiverError: On relations between classes of different shapes or
            relations that are neither solvable nor self-relations.
    """
    config = config or ForgeConfig()
    q = decompress(q)
    lay = layout(q)
    fld = q.field
    qq = q.q

    params = _parameter_values(q, config)
    base = q.coeff_ring
    param_ring = {name: base.scalar(val) for name, val in params.items()}

    symbols: list[Indeterminate] = []
    vertex_syms: dict[str, list[list[Indeterminate]]] = {}
    for v in q.vertices:
        if v.zero:
            continue
        key = q.vertex_class(v)
        if key not in vertex_syms:
            kind, order = _symbol_kind(q, [v.field_degree])
            vertex_syms[key] = _symbol_block(tag, key, v.degree, v.degree, kind, order)

    # arrow classes, with shape and symbol kind taken from the first member
    class_shape: dict[str, tuple[int, int, str, int]] = {}
    for a in q.arrows:
        key = q.class_of(a)
        if key in class_shape:
            continue
        s, t = q.vertex(a.src), q.vertex(a.dst)
        kind, order = _symbol_kind(q, [s.field_degree, t.field_degree])
        class_shape[key] = (s.degree, t.degree, kind, order)

    solved = None
    if q.relations:
        depth = max(r.max_frob for r in q.relations) + 1
        solved = eliminate(
            q.relations,
            fld,
            truncation=depth * (len(q.relations) + 1),
            symbols=list(class_shape),
            q=qq,
        )
        selfrel = dict(solved.self_relations)
        bad = [c for c in solved.constraints if c.terms[0].symbol not in selfrel]
        if bad:
            raise QuiverError(
                f"Relation {bad[0].text(fld)} cannot be materialized: no clean pivot",
                "UNSUPPORTED_RELATION",
            )
        for sym, s_deg in solved.self_relations:
            if sym not in class_shape:
                continue
            rows, cols, kind, order = class_shape[sym]
            if kind == FINITE:
                current = round(math.log(order, qq))
                order = qq ** math.gcd(current, s_deg)
            else:
                order = qq**s_deg
            class_shape[sym] = (rows, cols, FINITE, order)

    arrow_syms: dict[str, list[list[RingElement]]] = {}
    dependents = solved.dependent_map() if solved else {}
    ring = base
    for key, (rows, cols, kind, order) in class_shape.items():
        if key in dependents:
            continue
        block = _symbol_block(tag, key, rows, cols, kind, order)
        for row in block:
            symbols.extend(row)
    for block in vertex_syms.values():
        for row in block:
            symbols.extend(row)

    pairs = imprimitive_pairs(q) if q.imprimitive == FREE_ENTRIES else []
    free_syms: dict[tuple[str, str], list[list[Indeterminate]]] = {}
    for s, d in pairs:
        sv, dv = q.vertex(s), q.vertex(d)
        kind, order = _symbol_kind(q, [sv.field_degree, dv.field_degree])
        free_syms[(s, d)] = _symbol_block(tag, f"~{s}~{d}", sv.degree, dv.degree, kind, order)
        for row in free_syms[(s, d)]:
            symbols.extend(row)

    ring = base.adjoin(*symbols)
    by_name = {s.name: s for s in symbols}
    for key, (rows, cols, _, _) in class_shape.items():
        if key in dependents:
            continue
        arrow_syms[key] = [
            [ring.var(by_name[f"{tag}:{key}[{i},{j}]"]) for j in range(cols)] for i in range(rows)
        ]
    for key, expr in dependents.items():
        if key not in class_shape:
            continue
        rows, cols, _, _ = class_shape[key]
        block = [[ring.zero] * cols for _ in range(rows)]
        for term in expr.terms:
            if term.symbol not in arrow_syms:
                continue
            src = arrow_syms[term.symbol]
            if (len(src), len(src[0])) != (rows, cols):
                raise QuiverError(
                    f"Relation joins arrow classes {key} and {term.symbol} of different shapes",
                    "RELATION_SHAPE",
                )
            for i in range(rows):
                for j in range(cols):
                    block[i][j] = block[i][j] + frobenius(src[i][j], term.frob, qq).scale(
                        term.coeff
                    )
        arrow_syms[key] = block

    data: dict[tuple[int, int], RingElement] = {}
    for v in q.vertices:
        if v.zero:
            continue
        syms = vertex_syms[q.vertex_class(v)]
        rows = lay.block(v.id)
        for i, r in enumerate(rows):
            for j, c in enumerate(rows):
                data[(r, c)] = frobenius(ring.var(syms[i][j]), v.twist, qq)
    for a in q.arrows:
        nu = q.nu(a)
        if params:
            nu = nu.substitute(param_ring, base)
        nu = nu.with_ring(ring)
        block = arrow_syms[q.class_of(a)]
        for i, r in enumerate(lay.block(a.src)):
            for j, c in enumerate(lay.block(a.dst)):
                entry = nu * frobenius(block[i][j], a.exponent, qq)
                if entry:
                    data[(r, c)] = entry
    for (s, d), syms in free_syms.items():
        for i, r in enumerate(lay.block(s)):
            for j, c in enumerate(lay.block(d)):
                data[(r, c)] = ring.var(syms[i][j])

    matrix = Matrix.build(lay.size, ring, data)
    logger.debug(f"Generic element of {q.name}: size {lay.size}, {len(symbols)} symbols")
    return GenericElement(matrix, lay, ring, tuple(symbols), tuple(sorted(params.items())))


def _split_generic(m: Matrix, coeff_ring: Ring) -> dict[Monomial, Matrix]:
    parts: dict[Monomial, dict[tuple[int, int], RingElement]] = {}
    for pos, val in m.entries:
        for mono, coeff in val.split(generic=True).items():
            parts.setdefault(mono, {})[pos] = coeff.with_ring(coeff_ring)
    return {mono: Matrix.build(m.size, coeff_ring, data) for mono, data in parts.items()}


def _extension_degree(fld: FieldSpec, order: int) -> int:
    d = 1
    while fld.order**d < order:
        d += 1
    return d


def coefficient_matrices(g: GenericElement) -> list[Matrix]:
    """
    Matrices spanning the algebra over the base field F.

    The generic element is split by generic monomial. A finite symbol whose
    values range over a proper extension GF(|F|^d) is evaluated instead at
    the basis 1, α, …, α^{d-1} of that extension over F, with every other
    such symbol set to 0. Those matrices have entries in the compositum of
    the extensions; the generic element is F-linear in its symbols, so the
    F-span of all of them is the F-span of the specializations.
    """
    fld = g.ring.field
    anns = g.ring.annihilators
    coeff_gens = tuple(x for x in g.ring.gens if not x.generic)
    wide = {
        x: _extension_degree(fld, x.order)
        for x in g.symbols
        if x.kind == FINITE and x.order > fld.order
    }
    if not wide:
        return list(_split_generic(g.matrix, Ring(fld, coeff_gens, anns)).values())

    ext = make_field(fld.p, fld.t * math.lcm(*wide.values()))
    full = Ring(ext, g.ring.gens, anns)
    coeff_ring = Ring(ext, coeff_gens, anns)
    zeros = {x.name: full.zero for x in wide}
    out = list(_split_generic(g.matrix.substitute(zeros, full), coeff_ring).values())
    for x, d in wide.items():
        alpha = embed_scalar(fld.p, make_field(fld.p, fld.t * d), ext)
        for k in range(d):
            point = {**zeros, x.name: full.scalar(ext.power(alpha, k))}
            part = _split_generic(g.matrix.substitute(point, full), coeff_ring).get(ONE)
            if part:
                out.append(part)
    logger.debug(f"Split {len(wide)} symbols over {fld} along bases of subfields of {ext}")
    return out


def specialize(
    g: GenericElement, assignment: Mapping[str, int], target: FieldSpec | None = None
) -> Matrix:
    """
    Evaluate the generic element at a point.

    Values are integers of the target field (the base field by default).
    Finite symbols of order Q must take values fixed by x ↦ x^Q.

    Raises:
        RingError: If a symbol is unassigned or a value leaves its subfield.
    """
    target = target or g.ring.field
    for sym in g.symbols:
        if sym.name not in assignment:
            raise RingError(f"No value for generic symbol {sym.name}", "MISSING_SYMBOL")
        value = assignment[sym.name]
        if sym.kind == FINITE and target.power(value, sym.order) != value:
            raise RingError(
                f"Value of {sym.name} does not lie in the subfield of order {sym.order}",
                "SUBFIELD_VIOLATION",
            )
    coeff_gens = tuple(x for x in g.ring.gens if not x.generic)
    out_ring = Ring(target, coeff_gens, g.ring.annihilators)
    values = {name: out_ring.scalar(v) for name, v in assignment.items()}
    return g.matrix.substitute(values, out_ring)


def check_gluing(q: FullQuiver, lay: BlockLayout, m: Matrix) -> list[str]:
    """
    Gluing conditions a concrete element violates; empty when it belongs to the algebra.

    Checks that zero vertices carry zero blocks, glued vertices carry twisted
    copies of their class representative, and scalar-labeled glued arrows
    carry ν-scaled twisted copies of theirs.
    """
    q = decompress(q)
    qq = q.q
    problems: list[str] = []

    def block(src: str, dst: str) -> Matrix:
        rows, cols = lay.block(src), lay.block(dst)
        data = {
            (i, j): m.get(r, c)
            for i, r in enumerate(rows)
            for j, c in enumerate(cols)
            if m.get(r, c)
        }
        return Matrix.build(max(len(rows), len(cols)), m.ring, data)

    for v in q.vertices:
        if v.zero and block(v.id, v.id):
            problems.append(f"zero vertex {v.id} has a nonzero block")
    for members in q.vertex_classes().values():
        rep = members[0]
        base = block(rep.id, rep.id)
        for v in members[1:]:
            d = v.twist - rep.twist
            want = base.frobenius(d, qq) if d >= 0 else None
            got = block(v.id, v.id)
            if want is None:
                want, got = got.frobenius(-d, qq), base
            if want != got:
                problems.append(f"vertex {v.id} is not the twisted copy of {rep.id}")
    for cls, members in q.arrow_classes().items():
        rep = members[0]
        rep_nu = q.nu(rep)
        if not rep_nu.is_scalar:
            continue
        for a in members[1:]:
            nu = q.nu(a)
            if not nu.is_scalar:
                continue
            target_fld = m.ring.field
            to_t = functools.partial(embed_scalar, source=q.field, target=target_fld)
            lhs = block(a.src, a.dst)
            rhs = block(rep.src, rep.dst)
            d = a.exponent - rep.exponent
            if d < 0:
                lhs, rhs = rhs, lhs
                nu, rep_nu = rep_nu, nu
                d = -d
            inv = target_fld.inv(to_t(rep_nu.scalar))
            scaled = rhs.map(lambda x, c=inv: x.scale(c)).frobenius(d, qq)
            want = scaled.map(lambda x, c=to_t(nu.scalar): x.scale(c))
            if want != lhs:
                problems.append(f"arrow {a.id} of class {cls} is not the scaled copy of {rep.id}")
    return problems


# Span closure and radical filtration


@dataclass
class AlgebraBasis:
    """A basis of the algebra over K, closed under products."""

    space: EchelonSpace
    unital: bool

    @property
    def basis(self) -> list[Matrix]:
        return self.space.basis

    @property
    def dimension(self) -> int:
        return self.space.dimension

    @functools.cached_property
    def structure_constants(self) -> list[list[list[int]]]:
        """c[i][j] lists the coordinates of b_i·b_j in the basis."""
        basis = self.basis
        products = [x.matmul(y) for x in basis for y in basis]
        coords = self.space.express(products)
        n = len(basis)
        return [coords[i * n : (i + 1) * n] for i in range(n)]


def span_closure(
    gens: Sequence[Matrix],
    fld: FieldSpec,
    size: int,
    ring: Ring,
    unital: bool = True,
    bound: int = 4096,
) -> AlgebraBasis:
    """
    Close the span of the generators under multiplication.

    Raises:
        BoundExceededError: If the basis grows past the bound.
    """
    space = EchelonSpace(fld, size, ring)
    if unital:
        space.extend([Matrix.identity(size, ring)])
    frontier = space.extend(gens)
    if unital:
        frontier = space.basis[:]
    while frontier:
        if space.dimension > bound:
            logger.error(f"Span closure exceeded {bound} basis elements")
            raise BoundExceededError(
                f"Span closure exceeded {bound} basis elements", "SPAN_TOO_LARGE"
            )
        basis = space.basis[:]
        products = [x.matmul(y) for x in frontier for y in basis]
        products += [y.matmul(x) for x in frontier for y in basis]
        frontier = space.extend(products)
    if space.dimension > bound:
        raise BoundExceededError(f"Span closure exceeded {bound} basis elements", "SPAN_TOO_LARGE")
    logger.debug(f"Span closure: dimension {space.dimension}")
    return AlgebraBasis(space, unital)


@dataclass
class RadicalFiltration:
    """J ⊃ J² ⊃ … ⊃ J^m = 0; ``spaces[k]`` spans J^{k+1}."""

    spaces: list[EchelonSpace]

    @property
    def dimensions(self) -> list[int]:
        return [s.dimension for s in self.spaces]

    @property
    def nilpotence_index(self) -> int:
        """Least m with J^m = 0."""
        return len(self.spaces) + 1

    @property
    def radical(self) -> EchelonSpace | None:
        return self.spaces[0] if self.spaces else None


def _semisimple_coordinate(lay: BlockLayout, key: CoordinateKey) -> bool:
    i, j, mono, _ = key
    return lay.diagonal(i, j) and not any(v.kind == NILPOTENT for v, _ in mono)


def radical_powers(alg: AlgebraBasis, lay: BlockLayout) -> RadicalFiltration:
    """
    The powers of the radical.

    J consists of the elements whose diagonal blocks have only nilpotent
    coefficients; J^{k+1} is spanned by the products of J^k with J.
    """
    space = alg.space
    coords = space.coords
    diag_cols = [c for c, key in enumerate(coords.keys) if _semisimple_coordinate(lay, key)]
    if diag_cols:
        rows = [[vec.get(c, 0) for vec in space.vectors] for c in diag_cols]
        kernel = null_space(space.field, rows)
        radical_gens = [space.combination(k) for k in kernel]
    else:
        radical_gens = list(space.basis)

    fld, size, ring = space.field, space.size, space.ring
    spaces: list[EchelonSpace] = []
    current = EchelonSpace(fld, size, ring, Coordinates())
    current.extend(radical_gens)
    radical = current
    while current.dimension:
        spaces.append(current)
        nxt = EchelonSpace(fld, size, ring, Coordinates())
        nxt.extend(x.matmul(y) for x in current.basis for y in radical.basis)
        current = nxt
    logger.debug(f"Radical filtration dimensions: {[s.dimension for s in spaces]}")
    return RadicalFiltration(spaces)


@dataclass
class Materialized:
    """Everything materialize computes for one quiver."""

    quiver: FullQuiver
    layout: BlockLayout
    generic: GenericElement
    coefficients: list[Matrix]
    basis: AlgebraBasis
    filtration: RadicalFiltration

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def nilpotence_index(self) -> int:
        return self.filtration.nilpotence_index

    @property
    def unital(self) -> bool:
        return self.basis.unital

    @property
    def probabilistic(self) -> bool:
        return self.generic.probabilistic

    def summary(self) -> dict[str, object]:
        return {
            "quiver": self.quiver.name,
            "size": self.layout.size,
            "dimension": self.dimension,
            "radical_dimensions": self.filtration.dimensions,
            "nilpotence_index": self.nilpotence_index,
            "unital": self.unital,
            "probabilistic": self.probabilistic,
        }


def materialize(
    q: FullQuiver,
    config: ForgeConfig | None = None,
    unital: bool | None = None,
    tag: str = "x",
) -> Materialized:
    """
    Materialize q: generic element, K-span basis and radical filtration.

    The algebra is unital unless q has a zero vertex, overridable with
    ``unital``.

    Raises:
        QuiverError: On relations that cannot be materialized.
        BoundExceededError: If the span closure exceeds the configured bound.
    """
    config = config or ForgeConfig()
    flat = decompress(q)
    if unital is None:
        unital = not any(v.zero for v in flat.vertices)
    g = generic_element(flat, tag=tag, config=config)
    coeffs = coefficient_matrices(g)
    ring = coeffs[0].ring if coeffs else Ring(flat.field)
    alg = span_closure(coeffs, flat.field, g.layout.size, ring, unital, config.span_bound)
    filt = radical_powers(alg, g.layout)
    logger.info(
        f"Materialized {q.name}: dimension {alg.dimension}, nilpotence index "
        f"{filt.nilpotence_index}"
    )
    return Materialized(flat, g.layout, g, coeffs, alg, filt)


def algebra_element(mat: Materialized, tag: str = "x") -> GenericElement:
    """
    Generic element of the whole algebra: Σ s_i·b_i over the K-span basis.

    The quiver's generic element only ranges over the span of its
    coefficient matrices, which products can enlarge. This one ranges over
    the algebra, so a polynomial vanishing on independent copies of it is an
    identity of the algebra.
    """
    space = mat.basis.space
    kind, order = (FREE, 0) if mat.quiver.infinite else (FINITE, space.field.order)
    symbols = tuple(
        Indeterminate(f"{tag}:b[{i}]", kind, order, generic=True) for i in range(space.dimension)
    )
    ring = space.ring.adjoin(*symbols)
    matrix = Matrix.zero(space.size, ring)
    for sym, b in zip(symbols, space.basis, strict=True):
        matrix = matrix + b.with_ring(ring) * ring.var(sym)
    return GenericElement(matrix, mat.layout, ring, symbols, mat.generic.parameters)
