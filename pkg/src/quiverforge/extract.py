"""
Recover a full quiver from a matrix algebra in block form.

The algebra is given by generators and a block layout. Symbolic generators
(generic elements) are checked identically; concrete ones are first closed
under products, and every test runs on the resulting basis. Gluing tests
are Frobenius-linear, so checking a spanning set is enough.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import networkx as nx

from quiverforge.basering import FINITE, FREE, FieldSpec, Ring, RingElement, frobenius
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import BoundExceededError, QuiverError
from quiverforge.linalg import Matrix, null_space, rank
from quiverforge.materialize import BlockLayout, generic_element, materialize, span_closure
from quiverforge.quiver import (
    FREE_ENTRIES,
    GENERATED,
    GREEK,
    ROMAN,
    Arrow,
    FullQuiver,
    Vertex,
    imprimitive_pairs,
    primitive_arrows,
)
from quiverforge.relations import QRelation, QTerm, RelationSet

logger = logging.getLogger(__name__)

Block = list[list[RingElement]]

# Twists searched for blocks over K when the base is finite.
DEFAULT_TWIST_SEARCH = 4


def _class_name(names: Sequence[str], k: int) -> str:
    return names[k] if k < len(names) else f"{names[0]}{k + 1}"


@dataclass
class VertexGluing:
    """Detected data for one diagonal block."""

    id: str
    degree: int
    zero: bool = False
    field_degree: int | None = None
    glue_class: str | None = None
    twist: int = 0


@dataclass
class ArrowGluing:
    """Detected data for one nonzero rectangle; class reps have ν = 1 and exponent 0."""

    src: str
    dst: str
    glue_class: int
    nu: int = 1
    exponent: int = 0


@dataclass
class Extraction:
    """Result of extract: the quiver plus the raw detections behind it."""

    quiver: FullQuiver
    vertices: list[VertexGluing]
    arrows: list[ArrowGluing]
    relations: RelationSet
    symbolic: bool
    samples: int = 0
    notes: list[str] = field(default_factory=list)


def _is_symbolic(gens: Sequence[Matrix]) -> bool:
    return any(v.generic for m in gens for v in m.variables())


def algebra_samples(
    gens: Sequence[Matrix], fld: FieldSpec, config: ForgeConfig | None = None
) -> list[Matrix]:
    """
    Elements on which gluing is tested.

    Symbolic generators are used with their pairwise products; concrete ones
    are replaced by a basis of their span closure.
    """
    config = config or ForgeConfig()
    gens = [g for g in gens if g]
    if not gens:
        return []
    ring = gens[0].ring
    for g in gens[1:]:
        ring = ring.merge(g.ring)
    gens = [g.with_ring(ring) for g in gens]
    if _is_symbolic(gens):
        return gens + [x.matmul(y) for x in gens for y in gens]
    alg = span_closure(gens, fld, gens[0].size, ring, unital=False, bound=config.span_bound)
    return list(alg.basis)


def _block(m: Matrix, lay: BlockLayout, src: str, dst: str) -> Block:
    return lay.rectangle(m, src, dst)


def _frob_block(b: Block, u: int, q: int) -> Block:
    return [[frobenius(x, u, q) for x in row] for row in b]


def _is_zero(b: Block) -> bool:
    return not any(x for row in b for x in row)


def _base_log(fld: FieldSpec, q: int) -> int:
    return round(math.log(q, fld.p))


def _subfield_degree(blocks: Sequence[Block], fld: FieldSpec, q: int) -> int | None:
    """Degree over GF(q) of the smallest field holding every entry; None for K."""
    degrees = []
    s = _base_log(fld, q)
    for b in blocks:
        for row in b:
            for x in row:
                for var in x.variables():
                    if var.kind == FREE:
                        return None
                    if var.kind == FINITE:
                        degrees.append(_base_log(fld, var.order) // s)
                for _, c in x.terms:
                    rel = fld.t // s
                    fixed = (
                        d for d in range(1, rel + 1) if rel % d == 0 and fld.frob(c, d, s) == c
                    )
                    degrees.append(next(fixed))
    return math.lcm(*degrees) if degrees else 1


def _twist_range(
    degrees: Sequence[int | None], infinite: bool, config: ForgeConfig
) -> range:
    if infinite:
        return range(1)
    if any(t is None for t in degrees):
        bound = config.degree_bound if config.degree_bound is not None else DEFAULT_TWIST_SEARCH
        return range(bound + 1)
    return range(math.lcm(*[t for t in degrees if t is not None]))


def detect_diagonal_gluing(
    samples: Sequence[Matrix],
    lay: BlockLayout,
    fld: FieldSpec,
    q: int | None = None,
    infinite: bool = False,
    config: ForgeConfig | None = None,
) -> list[VertexGluing]:
    """
    Detect zero blocks, block fields and Frobenius-twisted equalities between blocks.

    Each block is compared with the earlier class representatives; the first
    twist t with block = Frob^t(representative) on every sample wins.
    """
    config = config or ForgeConfig()
    q = q or fld.order
    found: list[VertexGluing] = []
    reps: list[tuple[VertexGluing, list[Block]]] = []
    for vid, n in zip(lay.ids, lay.sizes, strict=True):
        blocks = [_block(m, lay, vid, vid) for m in samples]
        info = VertexGluing(vid, n)
        found.append(info)
        if all(_is_zero(b) for b in blocks):
            info.zero = True
            continue
        info.field_degree = None if infinite else _subfield_degree(blocks, fld, q)
        for rep, rep_blocks in reps:
            if rep.degree != n or rep.field_degree != info.field_degree:
                continue
            twist = next(
                (
                    t
                    for t in _twist_range([info.field_degree], infinite, config)
                    if all(
                        _frob_block(rb, t, q) == b for rb, b in zip(rep_blocks, blocks, strict=True)
                    )
                ),
                None,
            )
            if twist is not None:
                info.glue_class = rep.id
                info.twist = twist
                break
        else:
            reps.append((info, blocks))
    logger.debug(f"Diagonal gluing: {[(v.id, v.glue_class, v.twist) for v in found]}")
    return found


def _ratio(target: Block, source: Block, fld: FieldSpec) -> int | None:
    """ν with target = ν·source entrywise, or None."""
    for trow, srow in zip(target, source, strict=True):
        for t, s in zip(trow, srow, strict=True):
            if s:
                mono, c = s.terms[0]
                nu = fld.mul(t.coefficient(mono), fld.inv(c))
                return nu or None
            if t:
                return None
    return None


def detect_offdiagonal_gluing(
    samples: Sequence[Matrix],
    lay: BlockLayout,
    vertices: Sequence[VertexGluing],
    fld: FieldSpec,
    q: int | None = None,
    infinite: bool = False,
    config: ForgeConfig | None = None,
) -> list[ArrowGluing]:
    """
    Detect nonzero rectangles and ν-scaled Frobenius gluing between them.

    Two rectangles are glued when one is ν·Frob^e of the other on every
    sample and their endpoints are glued.
    """
    config = config or ForgeConfig()
    q = q or fld.order
    info = {v.id: v for v in vertices}

    def cls_of(v: VertexGluing) -> str:
        return "∘" if v.zero else (v.glue_class or v.id)

    found: list[ArrowGluing] = []
    reps: list[tuple[ArrowGluing, list[Block]]] = []
    for i, src in enumerate(lay.ids):
        for dst in lay.ids[i + 1 :]:
            rects = [_block(m, lay, src, dst) for m in samples]
            if all(_is_zero(r) for r in rects):
                continue
            s, t = info[src], info[dst]
            arrow = ArrowGluing(src, dst, len(reps))
            for rep, rep_rects in reps:
                rs, rt = info[rep.src], info[rep.dst]
                if (rs.degree, rt.degree) != (s.degree, t.degree):
                    continue
                if cls_of(rs) != cls_of(s) or cls_of(rt) != cls_of(t):
                    continue
                match = _match_rectangles(
                    rep_rects,
                    rects,
                    fld,
                    q,
                    _twist_range([s.field_degree, t.field_degree], infinite, config),
                )
                if match is not None:
                    arrow.glue_class = rep.glue_class
                    arrow.nu, arrow.exponent = match
                    break
            else:
                reps.append((arrow, rects))
            found.append(arrow)
    logger.debug(f"Off-diagonal gluing: {len(found)} rectangles in {len(reps)} classes")
    return found


def _match_rectangles(
    rep: Sequence[Block], other: Sequence[Block], fld: FieldSpec, q: int, exponents: range
) -> tuple[int, int] | None:
    for e in exponents:
        twisted = [_frob_block(b, e, q) for b in rep]
        nu = None
        for tb, ob in zip(twisted, other, strict=True):
            if _is_zero(tb) and _is_zero(ob):
                continue
            nu = _ratio(ob, tb, fld)
            break
        if nu is None:
            continue
        if all(
            [[x.scale(nu) for x in row] for row in tb] == ob
            for tb, ob in zip(twisted, other, strict=True)
        ):
            return nu, e
    return None


def _coordinate_position(
    rects: Sequence[Block],
) -> tuple[int, int] | None:
    for b in rects:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                if x:
                    return i, j
    return None


def detect_extra_relations(
    samples: Sequence[Matrix],
    lay: BlockLayout,
    arrows: Sequence[ArrowGluing],
    fld: FieldSpec,
    q: int | None = None,
    degree_bound: int = 0,
    config: ForgeConfig | None = None,
) -> list[QRelation]:
    """
    q-semilinear relations Σ c·λ_k^{q^j} = 0 among the arrow-class coordinates.

    Each class contributes one coordinate (the first nonzero entry of its
    representative); each λ_k^{q^j} with j ≤ degree_bound is an unknown of a
    linear system. Only relations not generated by Frobenius shifts of
    earlier ones are returned, with symbols named by class index.

    Raises:
        BoundExceededError: If the system has more unknowns than the span bound.
    """
    config = config or ForgeConfig()
    q = q or fld.order
    s = _base_log(fld, q)
    coords: list[tuple[int, list[RingElement]]] = []
    for a in arrows:
        if a.nu != 1 or a.exponent or any(c == a.glue_class for c, _ in coords):
            continue
        rects = [_block(m, lay, a.src, a.dst) for m in samples]
        pos = _coordinate_position(rects)
        if pos is not None:
            coords.append((a.glue_class, [r[pos[0]][pos[1]] for r in rects]))
    unknowns = [(k, j) for j in range(degree_bound + 1) for k, _ in coords]
    if len(unknowns) > config.span_bound:
        logger.error(f"Relation search needs {len(unknowns)} unknowns")
        raise BoundExceededError(
            f"Relation search needs {len(unknowns)} unknowns, bound is {config.span_bound}",
            "RELATION_SEARCH_TOO_LARGE",
        )
    if len(coords) < 1:
        return []
    values = dict(coords)
    rows: dict[tuple[int, object], dict[int, int]] = {}
    for col, (k, j) in enumerate(unknowns):
        for n, x in enumerate(values[k]):
            for mono, c in frobenius(x, j, q).terms:
                rows.setdefault((n, mono), {})[col] = c
    matrix = [[row.get(c, 0) for c in range(len(unknowns))] for row in rows.values()]

    def shift(vec: dict[int, int], u: int) -> dict[int, int] | None:
        out = {}
        for col, c in vec.items():
            k, j = unknowns[col]
            if j + u > degree_bound:
                return None
            out[unknowns.index((k, j + u))] = fld.frob(c, u, s)
        return out

    kept: list[dict[int, int]] = []
    generated: list[dict[int, int]] = []
    for level in range(degree_bound + 1):
        cols = [c for c, (_, j) in enumerate(unknowns) if j <= level]
        sub = [[row[c] for c in cols] for row in matrix] if matrix else [[0] * len(cols)]
        for vec in null_space(fld, sub):
            full = {cols[i]: v for i, v in enumerate(vec) if v}
            if not full:
                continue
            width = len(unknowns)
            if rank(fld, generated + [full], width) == rank(fld, generated, width):
                continue
            kept.append(full)
            for u in range(degree_bound + 1):
                shifted = shift(full, u)
                if shifted is not None:
                    generated.append(shifted)

    relations = []
    for vec in kept:
        terms = [QTerm(str(unknowns[c][0]), unknowns[c][1], v) for c, v in sorted(vec.items())]
        relations.append(QRelation.of(terms, fld).normalized())
    logger.debug(f"Found {len(relations)} extra relations up to degree {degree_bound}")
    return relations


def build_full_quiver(
    lay: BlockLayout,
    vertices: Sequence[VertexGluing],
    arrows: Sequence[ArrowGluing],
    relations: Sequence[QRelation],
    fld: FieldSpec,
    infinite: bool = False,
    name: str = "extracted",
    imprimitive: str = FREE_ENTRIES,
) -> FullQuiver:
    """
    Assemble the detections into a full quiver and erase non-primitive arrows.

    Vertex classes with two or more members get Roman names, arrow classes
    with two or more members or occurring in a relation get Greek names, in
    layout order.
    """
    vclass_size: dict[str, int] = {}
    for v in vertices:
        if not v.zero:
            key = v.glue_class or v.id
            vclass_size[key] = vclass_size.get(key, 0) + 1
    vnames: dict[str, str] = {}
    verts = []
    for v in vertices:
        key = v.glue_class or v.id
        cls = None
        if not v.zero and vclass_size[key] > 1:
            cls = vnames.setdefault(key, _class_name(ROMAN, len(vnames)))
        verts.append(
            Vertex(
                v.id,
                cls,
                v.degree,
                None if v.zero else v.field_degree,
                v.twist,
                zero=v.zero,
            )
        )

    in_relations = {int(sym) for rel in relations for sym in rel.symbols()}
    sizes: dict[int, int] = {}
    for a in arrows:
        sizes[a.glue_class] = sizes.get(a.glue_class, 0) + 1
    anames: dict[int, str] = {}
    ring = Ring(fld)
    arrs = []
    for n, a in enumerate(arrows, start=1):
        cls = None
        if sizes[a.glue_class] > 1 or a.glue_class in in_relations:
            cls = anames.setdefault(a.glue_class, _class_name(GREEK, len(anames)))
        nu = None if a.nu == 1 else ring.scalar(a.nu)
        arrs.append(Arrow(f"a{n}", a.src, a.dst, cls, nu, a.exponent))

    rels = RelationSet(
        tuple(r.rename({str(k): v for k, v in anames.items()}) for r in relations)
    )
    q = FullQuiver(
        name,
        fld,
        tuple(verts),
        tuple(arrs),
        relations=rels,
        infinite=infinite,
        imprimitive=imprimitive,
    )
    _, erased = primitive_arrows(q)
    return erased


def generated_entries(
    gens: Sequence[Matrix], lay: BlockLayout, arrows: Sequence[ArrowGluing]
) -> set[tuple[str, str]]:
    """
    Rectangles filled by products only: zero in every generator.

    Empty unless each such rectangle is reached by a path through the others.
    """
    filled = {(a.src, a.dst) for a in arrows}
    products = {
        (s, d) for s, d in filled if all(_is_zero(_block(g, lay, s, d)) for g in gens)
    }
    g = nx.DiGraph(list(filled - products))
    if all(s in g and d in g and nx.has_path(g, s, d) for s, d in products):
        return products
    return set()


def extract(
    gens: Sequence[Matrix],
    lay: BlockLayout,
    fld: FieldSpec,
    infinite: bool = False,
    q: int | None = None,
    degree_bound: int | None = None,
    config: ForgeConfig | None = None,
    name: str = "extracted",
) -> Extraction:
    """
    Extract the full quiver of the algebra generated by ``gens``.

    ``q`` is the order of the base field (the field of the matrices by
    default); the relation search runs up to q^degree_bound, defaulting to
    the configured bound or t_max·(m−1), with m − 1 the longest chain of
    nonzero rectangles. That chain bounds the nilpotence index when the
    diagonal blocks are fields; ``reextract`` passes the exact index.

    When symbolic generators vanish on rectangles that their products fill,
    the quiver uses generated semantics and those rectangles get no arrow.

    Raises:
        QuiverError: If the generators do not match the layout.
        BoundExceededError: If a search exceeds the configured bounds.
    """
    config = config or ForgeConfig()
    q = q or fld.order
    for g in gens:
        if g.size != lay.size:
            raise QuiverError(
                f"Generator of size {g.size} does not fit layout of size {lay.size}",
                "LAYOUT_MISMATCH",
            )
    symbolic = _is_symbolic(gens)
    samples = algebra_samples(gens, fld, config)
    vertices = detect_diagonal_gluing(samples, lay, fld, q, infinite, config)
    arrows = detect_offdiagonal_gluing(samples, lay, vertices, fld, q, infinite, config)
    mode = FREE_ENTRIES
    products = generated_entries(gens, lay, arrows) if symbolic else set()
    if products:
        mode = GENERATED
        arrows = [a for a in arrows if (a.src, a.dst) not in products]
        logger.debug(f"Generated entries {sorted(products)}")
    if infinite:
        bound = 0
    elif degree_bound is not None:
        bound = degree_bound
    elif config.degree_bound is not None:
        bound = config.degree_bound
    else:
        t_max = max((v.field_degree or 1 for v in vertices), default=1)
        chain = nx.DiGraph([(a.src, a.dst) for a in arrows])
        bound = t_max * (nx.dag_longest_path_length(chain) if chain else 0)
    relations = detect_extra_relations(samples, lay, arrows, fld, q, bound, config)
    quiver = build_full_quiver(lay, vertices, arrows, relations, fld, infinite, name, mode)
    logger.info(
        f"Extracted {name}: {len(quiver.vertices)} vertices, {len(quiver.arrows)} arrows, "
        f"{len(quiver.relations)} relations"
    )
    return Extraction(quiver, vertices, arrows, quiver.relations, symbolic, len(samples))


# Equivalence up to relabeling


def _partition(groups: Sequence[Sequence[str]]) -> set[frozenset[str]]:
    return {frozenset(g) for g in groups if len(g) > 1}


def _relation_rank(rels: RelationSet, index: dict[tuple[str, int], int], fld: FieldSpec) -> int:
    vecs = []
    for rel in rels:
        vec = {}
        for t in rel.normalized().terms:
            vec[index.setdefault((t.symbol, t.frob), len(index))] = t.coeff
        vecs.append(vec)
    return rank(fld, vecs, len(index)) if vecs else 0


def equivalent(q1: FullQuiver, q2: FullQuiver, limit: int = 1000) -> bool:
    """
    Whether two quivers agree up to renaming vertices, arrows and classes.

    Tries graph isomorphisms matching block shapes and checks vertex and
    arrow gluing (with relative twists, ν ratios and exponents) and the span
    of the relations under each.
    """
    if len(q1.vertices) != len(q2.vertices) or len(q1.arrows) != len(q2.arrows):
        return False
    if q1.imprimitive != q2.imprimitive and (imprimitive_pairs(q1) or imprimitive_pairs(q2)):
        return False

    def shape(v: Vertex) -> tuple[int, int | None, bool]:
        return v.degree, v.field_degree, v.zero

    g1, g2 = q1.graph(), q2.graph()
    for v in q1.vertices:
        g1.nodes[v.id]["shape"] = shape(v)
    for v in q2.vertices:
        g2.nodes[v.id]["shape"] = shape(v)
    matcher = nx.algorithms.isomorphism.DiGraphMatcher(
        g1, g2, node_match=lambda a, b: a["shape"] == b["shape"]
    )
    for mapping in itertools.islice(matcher.isomorphisms_iter(), limit):
        if _gluing_agrees(q1, q2, mapping):
            return True
    return False


def _gluing_agrees(q1: FullQuiver, q2: FullQuiver, mapping: dict[str, str]) -> bool:
    for members in q1.vertex_classes().values():
        images = [q2.vertex(mapping[v.id]) for v in members]
        if len(members) > 1 and (
            images[0].glue_class is None or len({w.glue_class for w in images}) != 1
        ):
            return False
        rep, rep_img = members[0], images[0]
        for v, w in zip(members, images, strict=True):
            d1, d2 = v.twist - rep.twist, w.twist - rep_img.twist
            mod = v.field_degree
            if (d1 - d2) % mod if mod else d1 != d2:
                return False
    p1 = _partition([[mapping[v.id] for v in m] for m in q1.vertex_classes().values()])
    p2 = _partition([[v.id for v in m] for m in q2.vertex_classes().values()])
    if p1 != p2:
        return False

    image_arrow = {}
    for a in q1.arrows:
        b = q2.arrow_between(mapping[a.src], mapping[a.dst])
        if b is None:
            return False
        image_arrow[a.id] = b
    a_part1 = _partition(
        [[image_arrow[a.id].id for a in m] for m in q1.arrow_classes().values()]
    )
    a_part2 = _partition([[a.id for a in m] for m in q2.arrow_classes().values()])
    if a_part1 != a_part2:
        return False
    renames: dict[str, str] = {}
    for cls, members in q1.arrow_classes().items():
        rep, rep_img = members[0], image_arrow[members[0].id]
        if rep_img.glue_class is not None:
            renames[cls] = rep_img.glue_class
        for a in members[1:]:
            b = image_arrow[a.id]
            if (a.exponent - rep.exponent) != (b.exponent - rep_img.exponent):
                return False
            nus = (q1.nu(a), q1.nu(rep), q2.nu(b), q2.nu(rep_img))
            if not all(n.is_scalar for n in nus):
                continue
            f1, f2 = q1.field, q2.field
            if f1.mul(nus[0].scalar, f1.inv(nus[1].scalar)) != f2.mul(
                nus[2].scalar, f2.inv(nus[3].scalar)
            ):
                return False
    rel1 = q1.relations.rename(renames)
    index: dict[tuple[str, int], int] = {}
    r1 = _relation_rank(rel1, index, q1.field)
    r2 = _relation_rank(q2.relations, index, q2.field)
    both = _relation_rank(RelationSet(rel1.relations + q2.relations.relations), index, q1.field)
    return r1 == r2 == both


def reextract(q: FullQuiver, config: ForgeConfig | None = None) -> tuple[Extraction, FullQuiver]:
    """
    Materialize q and extract a full quiver back from two generic elements.

    Two independent elements are needed so that products reveal the entries
    of generated semantics. The relation search runs up to q^{t_max·(m−1)}
    with m the nilpotence index of the materialized algebra.

    Returns:
        The extraction and the quiver it should match: q decompressed with
        its erasable non-primitive arrows removed.
    """
    config = config or ForgeConfig()
    mat = materialize(q, config)
    other = generic_element(mat.quiver, tag="y", config=config)
    t_max = max((v.field_degree or 1 for v in mat.quiver.vertices), default=1)
    found = extract(
        [mat.generic.matrix, other.matrix],
        mat.layout,
        mat.quiver.field,
        infinite=mat.quiver.infinite,
        q=mat.quiver.q,
        degree_bound=t_max * (mat.nilpotence_index - 1),
        config=config,
        name=f"{q.name}'",
    )
    _, expected = primitive_arrows(mat.quiver)
    return found, expected
