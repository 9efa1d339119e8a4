"""
The full-quiver data model: block vertices, gluing-labeled arrows, and the
graph operations on them.

A vertex stands for one diagonal block of a Wedderburn block form and an
arrow for a nonzero off-diagonal rectangle. Vertices sharing a glue class
carry Frobenius-twisted copies of one block; arrows sharing a glue class
carry ν-scaled Frobenius-twisted copies of one rectangle.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import logging
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import networkx as nx

from quiverforge.basering import FieldSpec, KProxy, Ring, RingElement, document_text
from quiverforge.exceptions import QuiverError
from quiverforge.relations import RelationSet

logger = logging.getLogger(__name__)

FREE_ENTRIES = "free"
GENERATED = "generated"
IMPRIMITIVE_MODES = (FREE_ENTRIES, GENERATED)

# Arrow class names handed out by the builders.
GREEK = ("alpha", "beta", "gamma", "delta", "kappa", "mu", "rho", "sigma", "tau", "phi")
ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X")


def infinite_base(prime: int = 32003) -> FieldSpec:
    """Scalar field standing in for K."""
    return KProxy(prime=prime).field


@dataclass(frozen=True)
class Vertex:
    """
    One diagonal block.

    ``field_degree`` None means the block lives over K. ``infinitesimals``
    lists the orders of the ε-generators of a compressed vertex.
    """

    id: str
    glue_class: str | None = None
    degree: int = 1
    field_degree: int | None = 1
    twist: int = 0
    zero: bool = False
    infinitesimals: tuple[int, ...] = ()

    @property
    def finite(self) -> bool:
        return self.field_degree is not None

    @property
    def multiplicity(self) -> int:
        """Number of glued copies this vertex stands for once decompressed."""
        return math.prod(self.infinitesimals)

    def label(self) -> str:
        if self.zero:
            head = "∘"
        elif self.glue_class is None:
            head = "•"
        else:
            head = self.glue_class
        t = "K" if self.field_degree is None else str(self.field_degree)
        text = f"{head}₍{self.degree},{t}₎"
        text += "".join(f"({ell})" for ell in self.infinitesimals)
        if self.twist:
            text += f"^({self.twist})"
        return text


@dataclass(frozen=True)
class Arrow:
    """
    A nonzero rectangle from ``src`` to ``dst``.

    The rectangle is ν·Z^{q^exponent} for the class symbol Z. ``shift`` is
    nonzero only between compressed vertices, where it is the ε-power the
    arrow starts at.
    """

    id: str
    src: str
    dst: str
    glue_class: str | None = None
    nu: RingElement | None = None
    exponent: int = 0
    shift: int = 0

    def label(self) -> str:
        cls = self.glue_class or self.id
        text = cls
        if self.nu is not None and self.nu != self.nu.ring.one:
            nu_text = document_text(self.nu)
            text = f"({nu_text})·{cls}" if " " in nu_text else f"{nu_text}·{cls}"
        if self.exponent:
            text += f"^{{q^{self.exponent}}}"
        if self.shift:
            text += f"·ε^{self.shift}"
        return text


@dataclass(frozen=True)
class FullQuiver:
    """
    A full quiver over a finite base GF(q) or, when ``infinite`` is set, over
    the K-proxy field.

    ``ring`` is the coefficient ring of the ν labels (θ, ξ, ψ generators);
    ``frobenius_pairs`` optionally records explicit relative Frobenius
    exponents between glued vertices.
    """

    name: str
    field: FieldSpec
    vertices: tuple[Vertex, ...]
    arrows: tuple[Arrow, ...] = ()
    relations: RelationSet = RelationSet()
    ring: Ring | None = None
    infinite: bool = False
    imprimitive: str = FREE_ENTRIES
    frobenius_pairs: tuple[tuple[str, str, int], ...] = ()

    @property
    def coeff_ring(self) -> Ring:
        return self.ring or Ring(self.field)

    @property
    def q(self) -> int:
        return self.field.order

    @functools.cached_property
    def index(self) -> dict[str, int]:
        return {v.id: i for i, v in enumerate(self.vertices)}

    @functools.cached_property
    def _vertex_map(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @functools.cached_property
    def _arrow_map(self) -> dict[str, Arrow]:
        return {a.id: a for a in self.arrows}

    @functools.cached_property
    def _pairs(self) -> dict[tuple[str, str], Arrow]:
        return {(a.src, a.dst): a for a in self.arrows}

    def vertex(self, vid: str) -> Vertex:
        try:
            return self._vertex_map[vid]
        except KeyError as e:
            raise QuiverError(f"Quiver {self.name} has no vertex {vid!r}", "UNKNOWN_VERTEX") from e

    def arrow(self, aid: str) -> Arrow:
        try:
            return self._arrow_map[aid]
        except KeyError as e:
            raise QuiverError(f"Quiver {self.name} has no arrow {aid!r}", "UNKNOWN_ARROW") from e

    def arrow_between(self, src: str, dst: str) -> Arrow | None:
        return self._pairs.get((src, dst))

    def nu(self, arrow: Arrow) -> RingElement:
        return arrow.nu if arrow.nu is not None else self.coeff_ring.one

    def class_of(self, arrow: Arrow) -> str:
        """Glue class name; unglued arrows form singleton classes."""
        return arrow.glue_class if arrow.glue_class is not None else f"~{arrow.id}"

    def vertex_class(self, vertex: Vertex) -> str:
        if vertex.zero:
            return "∘"
        return vertex.glue_class if vertex.glue_class is not None else f"~{vertex.id}"

    def arrow_classes(self) -> dict[str, list[Arrow]]:
        """Named arrow classes in document order."""
        classes: dict[str, list[Arrow]] = {}
        for a in self.arrows:
            if a.glue_class is not None:
                classes.setdefault(a.glue_class, []).append(a)
        return classes

    def vertex_classes(self) -> dict[str, list[Vertex]]:
        classes: dict[str, list[Vertex]] = {}
        for v in self.vertices:
            if v.glue_class is not None:
                classes.setdefault(v.glue_class, []).append(v)
        return classes

    def out_arrows(self, vid: str) -> list[Arrow]:
        return [a for a in self.arrows if a.src == vid]

    def in_arrows(self, vid: str) -> list[Arrow]:
        return [a for a in self.arrows if a.dst == vid]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(v.id for v in self.vertices)
        g.add_edges_from((a.src, a.dst) for a in self.arrows)
        return g

    def replace(self, **changes: object) -> FullQuiver:
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    def glued(self, u: Vertex, v: Vertex) -> bool:
        """Whether two vertices are identified up to twist (zero blocks always are)."""
        if u.id == v.id:
            return True
        if u.zero or v.zero:
            return u.zero and v.zero
        return u.glue_class is not None and u.glue_class == v.glue_class


@dataclass(frozen=True)
class Violation:
    """One failed invariant: ``kind`` names it, ``subject`` points at the offender."""

    kind: str
    message: str
    subject: str = ""


@dataclass
class ValidationReport:
    """Every violation found by validate."""

    quiver: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, message: str, subject: str = "") -> None:
        self.violations.append(Violation(kind, message, subject))

    def raise_for_violations(self) -> None:
        """
        Raises:
            QuiverError: With the first violation's kind as error code.
        """
        if self.violations:
            first = self.violations[0]
            raise QuiverError(
                f"Quiver {self.quiver} is invalid: {first.message}", f"INVALID_{first.kind.upper()}"
            )


def _twist_agrees(delta: int, modulus: int | None) -> bool:
    if modulus is None:
        return delta == 0
    return delta % modulus == 0


def validate(q: FullQuiver) -> ValidationReport:
    """
    Check the structural invariants of a full quiver.

    Reports, rather than raises, every violation: unknown endpoints, loops,
    double arrows and cycles; glue classes whose vertices disagree in shape;
    twist ranges; glued arrows between unglued vertices (p2p); arrow twists
    that no exponent can realize; exponent and cocycle failures of explicit
    Frobenius pairs; relations over unknown classes.
    """
    report = ValidationReport(q.name)
    ids = [v.id for v in q.vertices]
    for vid in {x for x in ids if ids.count(x) > 1}:
        report.add("duplicate_id", f"Vertex id {vid} is used twice", vid)
    if q.imprimitive not in IMPRIMITIVE_MODES:
        report.add("imprimitive", f"Unknown imprimitive mode {q.imprimitive}")

    known = set(ids)
    seen_pairs: set[tuple[str, str]] = set()
    for a in q.arrows:
        if a.src not in known or a.dst not in known:
            report.add("unknown_vertex", f"Arrow {a.id} has an unknown endpoint", a.id)
            continue
        if a.src == a.dst:
            report.add("loop", f"Arrow {a.id} is a loop at {a.src}", a.id)
        if (a.src, a.dst) in seen_pairs:
            report.add("duplicate_arrow", f"Second arrow from {a.src} to {a.dst}", a.id)
        seen_pairs.add((a.src, a.dst))
        if a.exponent < 0 or a.shift < 0:
            report.add("twist_range", f"Arrow {a.id} has a negative exponent or shift", a.id)
        if q.infinite and a.exponent:
            report.add("infinite_twist", f"Arrow {a.id} has a Frobenius exponent over K", a.id)
    if report.ok:
        g = q.graph()
        if not nx.is_directed_acyclic_graph(g):
            cycle = nx.find_cycle(g)
            report.add("cycle", f"Quiver has a cycle through {cycle[0][0]}", cycle[0][0])

    for v in q.vertices:
        if v.degree < 1:
            report.add("degree", f"Vertex {v.id} has matrix degree {v.degree}", v.id)
        if v.field_degree is not None and v.field_degree < 1:
            report.add("degree", f"Vertex {v.id} has field degree {v.field_degree}", v.id)
        if any(ell < 1 for ell in v.infinitesimals):
            report.add("degree", f"Vertex {v.id} has an infinitesimal of order < 1", v.id)
        if v.zero and v.glue_class is not None:
            report.add("zero_class", f"Zero vertex {v.id} carries class {v.glue_class}", v.id)
        if v.twist < 0 or (v.field_degree is not None and v.twist >= v.field_degree):
            report.add("twist_range", f"Vertex {v.id} twist {v.twist} is not reduced", v.id)
        if q.infinite and v.twist:
            report.add("infinite_twist", f"Vertex {v.id} is twisted over K", v.id)

    for cls, members in q.vertex_classes().items():
        shape = (members[0].degree, members[0].field_degree)
        for v in members[1:]:
            if (v.degree, v.field_degree) != shape:
                report.add(
                    "class_mismatch",
                    f"Vertex {v.id} of class {cls} has shape {(v.degree, v.field_degree)}, "
                    f"expected {shape}",
                    v.id,
                )
    if not report.ok and report.kinds & {"unknown_vertex", "duplicate_id"}:
        return report

    _validate_arrow_gluing(q, report)
    _validate_frobenius_pairs(q, report)

    classes = set(q.arrow_classes())
    for sym in q.relations.symbols():
        if sym not in classes:
            report.add("relation_symbol", f"Relation mentions unknown arrow class {sym}", sym)

    if report.ok:
        logger.debug(f"Quiver {q.name} is valid")
    else:
        logger.debug(f"Quiver {q.name}: {len(report.violations)} violations")
    return report


def _validate_arrow_gluing(q: FullQuiver, report: ValidationReport) -> None:
    for cls, members in q.arrow_classes().items():
        rep = members[0]
        r, s = q.vertex(rep.src), q.vertex(rep.dst)
        for a in members[1:]:
            r2, s2 = q.vertex(a.src), q.vertex(a.dst)
            if not q.glued(r, r2) or not q.glued(s, s2):
                report.add(
                    "p2p",
                    f"Arrows {rep.id} and {a.id} of class {cls} join vertices that are not glued",
                    a.id,
                )
                continue
            if r.zero or s.zero:
                continue
            du, dv = r2.twist - r.twist, s2.twist - s.twist
            if r.field_degree is not None and s.field_degree is not None:
                g = math.gcd(r.field_degree, s.field_degree)
                if (du - dv) % g:
                    report.add(
                        "arrow_twist",
                        f"Arrows {rep.id} and {a.id}: endpoint twists {du} and {dv} differ "
                        f"modulo gcd {g}",
                        a.id,
                    )
                    continue
            de = a.exponent - rep.exponent
            if not _twist_agrees(de - du, r.field_degree) or not _twist_agrees(
                de - dv, s.field_degree
            ):
                report.add(
                    "arrow_exponent",
                    f"Arrow {a.id} exponent {a.exponent} does not match the twists of its "
                    f"endpoints relative to {rep.id}",
                    a.id,
                )


def _validate_frobenius_pairs(q: FullQuiver, report: ValidationReport) -> None:
    table: dict[tuple[str, str], int] = {}
    for r, s, ell in q.frobenius_pairs:
        u, v = q.vertex(r), q.vertex(s)
        if not q.glued(u, v) or u.zero:
            report.add("diagonal_exponent", f"Frobenius pair {r},{s} joins unglued vertices", r)
            continue
        table[(r, s)] = ell
        if u.field_degree is not None and (ell - (v.twist - u.twist)) % u.field_degree:
            report.add(
                "diagonal_exponent",
                f"Frobenius pair {r},{s} has exponent {ell}, twists give {v.twist - u.twist}",
                r,
            )
    for (r, s), ell_rs in table.items():
        t_r = q.vertex(r).field_degree
        for (s2, t), ell_st in table.items():
            if s2 != s or (r, t) not in table:
                continue
            ell_rt = table[(r, t)]
            if not _twist_agrees(ell_rt - ell_rs - ell_st, t_r):
                report.add(
                    "cocycle",
                    f"Exponents {r}{s}={ell_rs}, {s}{t}={ell_st}, {r}{t}={ell_rt} break "
                    f"the cocycle rule modulo {t_r}",
                    f"{r},{s},{t}",
                )


def topological_order(q: FullQuiver) -> list[str]:
    """Topological order breaking ties by document order."""
    return list(nx.lexicographical_topological_sort(q.graph(), key=lambda v: q.index[v]))


def closure_pairs(q: FullQuiver) -> set[tuple[str, str]]:
    """All (i, j) with a directed path of length ≥ 1 from i to j."""
    tc = nx.transitive_closure_dag(q.graph())
    return set(tc.edges())


def imprimitive_pairs(q: FullQuiver) -> list[tuple[str, str]]:
    """Pairs joined by a path but not by an arrow, in layout order."""
    pairs = closure_pairs(q) - {(a.src, a.dst) for a in q.arrows}
    return sorted(pairs, key=lambda p: (q.index[p[0]], q.index[p[1]]))


def transitive_arrows(q: FullQuiver) -> FullQuiver:
    """The arrow closure: every imprimitive pair restored as an unglued arrow."""
    extra = tuple(Arrow(f"{s}~{d}", s, d) for s, d in imprimitive_pairs(q))
    return q.replace(arrows=q.arrows + extra)


def is_convex(q: FullQuiver, subset: Iterable[str]) -> bool:
    """Whether every path between members of the subset stays inside it."""
    members = set(subset)
    g = q.graph()
    for v in q.vertices:
        if v.id in members:
            continue
        if nx.ancestors(g, v.id) & members and nx.descendants(g, v.id) & members:
            return False
    return True


def induced_subquiver(
    q: FullQuiver, subset: Iterable[str], arrows: Iterable[str] | None = None, name: str = ""
) -> FullQuiver:
    """
    Sub-quiver on the given vertices.

    With ``arrows`` only those arrows are kept. Relations are restricted to
    the surviving arrow classes.
    """
    members = set(subset)
    keep_arrows = set(arrows) if arrows is not None else None
    verts = tuple(v for v in q.vertices if v.id in members)
    arrs = tuple(
        a
        for a in q.arrows
        if a.src in members
        and a.dst in members
        and (keep_arrows is None or a.id in keep_arrows)
    )
    classes = {a.glue_class for a in arrs if a.glue_class}
    pairs = tuple(p for p in q.frobenius_pairs if p[0] in members and p[1] in members)
    return q.replace(
        name=name or f"{q.name}|{','.join(v.id for v in verts)}",
        vertices=verts,
        arrows=arrs,
        relations=q.relations.restrict(classes),
        frobenius_pairs=pairs,
    )


def primitive_arrows(q: FullQuiver) -> tuple[set[str], FullQuiver]:
    """
    Split arrows into primitive and non-primitive and erase what may be erased.

    An arrow i→j is primitive unless some k has arrows i→k and k→j. A
    non-primitive arrow is erased only when it is alone in its class and no
    relation mentions it; glued non-primitive arrows stay. Under generated
    semantics nothing is erased, since an explicit arrow there is a free entry.

    Returns:
        The primitive arrow ids and the erased quiver.
    """
    pairs = {(a.src, a.dst) for a in q.arrows}
    succ: dict[str, set[str]] = {}
    for s, d in pairs:
        succ.setdefault(s, set()).add(d)
    primitive = set()
    for a in q.arrows:
        if not any((k, a.dst) in pairs for k in succ.get(a.src, ())):
            primitive.add(a.id)
    sizes = Counter(q.class_of(a) for a in q.arrows)
    named = set(q.relations.symbols())

    def erasable(a: Arrow) -> bool:
        cls = q.class_of(a)
        return sizes[cls] == 1 and cls not in named and q.imprimitive == FREE_ENTRIES

    kept = tuple(a for a in q.arrows if a.id in primitive or not erasable(a))
    classes = {a.glue_class for a in kept if a.glue_class}
    erased = q.replace(arrows=kept, relations=q.relations.restrict(classes))
    logger.debug(f"Quiver {q.name}: {len(primitive)} primitive, erased {len(q.arrows) - len(kept)}")
    return primitive, erased


@dataclass(frozen=True)
class Branch:
    """A maximal directed path over primitive arrows."""

    vertices: tuple[str, ...]
    arrows: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.arrows)


def branches(q: FullQuiver) -> list[Branch]:
    """All maximal primitive paths, from vertices no primitive arrow enters."""
    primitive, _ = primitive_arrows(q)
    prim = [a for a in q.arrows if a.id in primitive]
    out: dict[str, list[Arrow]] = {}
    entered = set()
    for a in prim:
        out.setdefault(a.src, []).append(a)
        entered.add(a.dst)
    for lst in out.values():
        lst.sort(key=lambda a: q.index[a.dst])

    result: list[Branch] = []

    def walk(vid: str, verts: list[str], arrs: list[str]) -> None:
        nexts = out.get(vid, [])
        if not nexts:
            result.append(Branch(tuple(verts), tuple(arrs)))
            return
        for a in nexts:
            walk(a.dst, verts + [a.dst], arrs + [a.id])

    for v in q.vertices:
        if v.id not in entered:
            walk(v.id, [v.id], [])
    return result


def reverse(q: FullQuiver) -> FullQuiver:
    """The full quiver of the opposite algebra: every arrow turned around."""
    arrows = tuple(dataclasses.replace(a, src=a.dst, dst=a.src) for a in q.arrows)
    pairs = tuple((s, r, -ell) for r, s, ell in q.frobenius_pairs)
    return q.replace(
        name=f"{q.name}^op",
        vertices=tuple(reversed(q.vertices)),
        arrows=arrows,
        frobenius_pairs=pairs,
    )


@dataclass(frozen=True)
class ClassicalQuiver:
    """Glue classes as vertices; multiplicities count arrow classes, loops included."""

    vertices: tuple[str, ...]
    multiplicities: tuple[tuple[tuple[str, str], int], ...]
    best_effort: bool = False

    def multiplicity(self, src: str, dst: str) -> int:
        return dict(self.multiplicities).get((src, dst), 0)

    @property
    def arrow_count(self) -> int:
        return sum(m for _, m in self.multiplicities)


def classical_quiver(q: FullQuiver) -> ClassicalQuiver:
    """
    Collapse glue classes to single vertices.

    Every arrow class, and every imprimitive pair, contributes one arrow
    between the classes of its endpoints. Over a finite base the result is
    flagged best-effort.
    """
    verts: list[str] = []
    for v in q.vertices:
        key = _classical_vertex(q, v)
        if key not in verts:
            verts.append(key)
    edges: dict[tuple[str, str], set[str]] = {}
    for a in q.arrows:
        key = (_classical_vertex(q, q.vertex(a.src)), _classical_vertex(q, q.vertex(a.dst)))
        edges.setdefault(key, set()).add(q.class_of(a))
    for s, d in imprimitive_pairs(q):
        key = (_classical_vertex(q, q.vertex(s)), _classical_vertex(q, q.vertex(d)))
        edges.setdefault(key, set()).add(f"{s}~{d}")
    mult = tuple(
        sorted(
            ((k, len(v)) for k, v in edges.items()),
            key=lambda kv: (verts.index(kv[0][0]), verts.index(kv[0][1])),
        )
    )
    if not q.infinite:
        logger.warning(f"Classical quiver of {q.name} over a finite base is best-effort")
    return ClassicalQuiver(tuple(verts), mult, best_effort=not q.infinite)


def _classical_vertex(q: FullQuiver, v: Vertex) -> str:
    if v.zero:
        return f"∘{v.id}"
    return v.glue_class if v.glue_class is not None else v.id


def glue_connected_components(q: FullQuiver) -> list[list[str]]:
    """Components of undirected adjacency joined with vertex gluing, in document order."""
    g = nx.Graph()
    g.add_nodes_from(v.id for v in q.vertices)
    g.add_edges_from((a.src, a.dst) for a in q.arrows)
    for members in q.vertex_classes().values():
        g.add_edges_from(itertools.pairwise(v.id for v in members))
    comps = [sorted(c, key=q.index.__getitem__) for c in nx.connected_components(g)]
    return sorted(comps, key=lambda c: q.index[c[0]])


def embeddable(v: Vertex, w: Vertex, unital: bool = False) -> bool:
    """
    Whether the block of v embeds into the block of w.

    Finite blocks use the corner criterion n·lcm(t, t')/t' ≤ n' (equality
    when unital); anything embeds into K-blocks of at least its degree; K
    never embeds into a finite block.
    """
    if v.zero != w.zero:
        return False
    if w.field_degree is None:
        need = v.degree
    elif v.field_degree is None:
        return False
    else:
        need = v.degree * math.lcm(v.field_degree, w.field_degree) // w.field_degree
    return need == w.degree if unital else need <= w.degree


def find_morphism(
    q1: FullQuiver, q2: FullQuiver, unital: bool = False
) -> dict[str, str] | None:
    """
    Search for a sub-quiver morphism q1 → q2.

    Vertices map injectively onto embeddable vertices; each arrow of q1 must
    land on an arrow of the arrow closure of q2; glued vertices map to glued
    vertices with the same relative twist; glued arrows map to glued arrows.
    The identity is tried first, so find_morphism(q, q) is the identity.

    Returns:
        The vertex map, or None.
    """
    reach = closure_pairs(q2)
    order = topological_order(q1)
    targets = [v.id for v in q2.vertices]
    incoming = {v: [a.src for a in q1.in_arrows(v)] for v in order}
    outgoing = {v: [a.dst for a in q1.out_arrows(v)] for v in order}

    def compatible(vid: str, wid: str, mapping: dict[str, str]) -> bool:
        v, w = q1.vertex(vid), q2.vertex(wid)
        if not embeddable(v, w, unital):
            return False
        for u in incoming[vid]:
            if u in mapping and (mapping[u], wid) not in reach:
                return False
        for u in outgoing[vid]:
            if u in mapping and (wid, mapping[u]) not in reach:
                return False
        if v.glue_class is None:
            return True
        for uid, xid in mapping.items():
            u = q1.vertex(uid)
            if u.glue_class != v.glue_class:
                continue
            x = q2.vertex(xid)
            if x.glue_class is None or x.glue_class != w.glue_class:
                return False
            if not _twist_agrees((v.twist - u.twist) - (w.twist - x.twist), w.field_degree):
                return False
        return True

    def arrows_preserved(mapping: dict[str, str]) -> bool:
        for members in q1.arrow_classes().values():
            if len(members) < 2:
                continue
            images = [q2.arrow_between(mapping[a.src], mapping[a.dst]) for a in members]
            if any(b is None or b.glue_class is None for b in images):
                return False
            if len({b.glue_class for b in images if b is not None}) != 1:
                return False
        return True

    def search(i: int, mapping: dict[str, str], used: set[str]) -> dict[str, str] | None:
        if i == len(order):
            return dict(mapping) if arrows_preserved(mapping) else None
        vid = order[i]
        candidates = sorted(targets, key=lambda t: (t != vid, q2.index[t]))
        for wid in candidates:
            if wid in used or not compatible(vid, wid, mapping):
                continue
            mapping[vid] = wid
            used.add(wid)
            found = search(i + 1, mapping, used)
            if found is not None:
                return found
            del mapping[vid]
            used.discard(wid)
        return None

    result = search(0, {}, set())
    logger.debug(f"Morphism {q1.name} -> {q2.name}: {result}")
    return result


def morita_shrink(q: FullQuiver) -> FullQuiver:
    """Set every matrix degree to 1, keeping all gluing."""
    verts = tuple(dataclasses.replace(v, degree=1) for v in q.vertices)
    return q.replace(name=f"{q.name}/morita", vertices=verts)


def radical_power_quiver(q: FullQuiver, ell: int) -> FullQuiver:
    """
    Quiver of the ℓ-th radical power.

    Arrows between two zero vertices (pared arrows) are replaced by one
    unglued composite for each pair joined by a path of exactly ℓ pared
    arrows; unpared arrows are kept.

    Raises:
        QuiverError: If ℓ < 1.
    """
    if ell < 1:
        raise QuiverError(f"Radical power must be at least 1, got {ell}", "INVALID_POWER")
    if ell == 1:
        return q

    def pared(a: Arrow) -> bool:
        return q.vertex(a.src).zero and q.vertex(a.dst).zero

    pared_out: dict[str, list[Arrow]] = {}
    for a in q.arrows:
        if pared(a):
            pared_out.setdefault(a.src, []).append(a)

    composites: dict[tuple[str, str], RingElement] = {}

    def walk(start: str, vid: str, steps: int, nu: RingElement) -> None:
        if steps == ell:
            key = (start, vid)
            composites[key] = composites[key] + nu if key in composites else nu
            return
        for a in pared_out.get(vid, []):
            walk(start, a.dst, steps + 1, nu * q.nu(a))

    for v in q.vertices:
        walk(v.id, v.id, 0, q.coeff_ring.one)

    kept = [a for a in q.arrows if not pared(a)]
    ordered = sorted(composites.items(), key=lambda kv: (q.index[kv[0][0]], q.index[kv[0][1]]))
    for (s, d), nu in ordered:
        if nu and q.arrow_between(s, d) is None:
            kept.append(Arrow(f"{s}^{ell}{d}", s, d, nu=None if nu == nu.ring.one else nu))
    classes = {a.glue_class for a in kept if a.glue_class}
    return q.replace(
        name=f"{q.name}^J{ell}", arrows=tuple(kept), relations=q.relations.restrict(classes)
    )


# Builders


def _base(base: FieldSpec | None) -> tuple[FieldSpec, bool]:
    return (infinite_base(), True) if base is None else (base, False)


def path_quiver(
    name: str,
    classes: Sequence[str | None],
    arrow_classes: Sequence[str | None],
    base: FieldSpec | None = None,
    zero: bool = False,
) -> FullQuiver:
    """A path v1 → … → vn with the given vertex and arrow classes."""
    fld, infinite = _base(base)
    fdeg = None if infinite else 1
    verts = tuple(
        Vertex(f"v{i + 1}", None if zero else c, field_degree=fdeg, zero=zero)
        for i, c in enumerate(classes)
    )
    arrows = tuple(
        Arrow(f"a{i + 1}", f"v{i + 1}", f"v{i + 2}", c) for i, c in enumerate(arrow_classes)
    )
    return FullQuiver(name, fld, verts, arrows, infinite=infinite)


def elementary_quiver(
    kind: str,
    *,
    m: int = 1,
    n: int = 1,
    t1: int | None = None,
    t2: int | None = None,
    u: int = 0,
    base: FieldSpec | None = None,
) -> FullQuiver:
    """
    The single-arrow quivers: E1 (no gluing), E2 (identical), E3 (Frobenius
    twist u), E4 (∘→•), E4r (•→∘) and E5 (∘→∘).

    Raises:
        QuiverError: On an unknown kind or a Frobenius twist over K.
    """
    fld, infinite = _base(base)
    if infinite and (t1 is not None or t2 is not None or u):
        raise QuiverError("Finite field degrees and twists need a finite base", "INFINITE_TWIST")
    if kind == "E1":
        verts = (Vertex("v1", "I", m, t1), Vertex("v2", "II", n, t2))
    elif kind == "E2":
        verts = (Vertex("v1", "I", n, t1), Vertex("v2", "I", n, t1))
    elif kind == "E3":
        if t1 is None:
            raise QuiverError("Frobenius gluing needs a finite field degree", "INFINITE_TWIST")
        verts = (Vertex("v1", "I", n, t1), Vertex("v2", "I", n, t1, twist=u % t1))
    elif kind == "E4":
        verts = (Vertex("v1", None, m, None, zero=True), Vertex("v2", None, n, t2))
    elif kind == "E4r":
        verts = (Vertex("v1", None, m, t1), Vertex("v2", None, n, None, zero=True))
    elif kind == "E5":
        verts = (Vertex("v1", None, m, None, zero=True), Vertex("v2", None, n, None, zero=True))
    else:
        raise QuiverError(f"Unknown elementary quiver {kind}", "UNKNOWN_ELEMENTARY")
    return FullQuiver(kind, fld, verts, (Arrow("a1", "v1", "v2"),), infinite=infinite)


def glued_triangle(ell: int, base: FieldSpec | None = None, cls: str = "I") -> FullQuiver:
    """
    The glued triangle I(ℓ): ℓ identically glued vertices, every pair joined,
    arrows of equal length glued identically. Its algebra is F[λ]/⟨λ^ℓ⟩.
    """
    if ell < 1:
        raise QuiverError(f"Triangle length must be positive, got {ell}", "INVALID_TRIANGLE")
    fld, infinite = _base(base)
    fdeg = None if infinite else 1
    verts = tuple(Vertex(f"v{i}", cls, 1, fdeg) for i in range(1, ell + 1))
    arrows = tuple(
        Arrow(f"a{i}{j}", f"v{i}", f"v{j}", f"lambda{j - i}")
        for i in range(1, ell + 1)
        for j in range(i + 1, ell + 1)
    )
    return FullQuiver(f"I({ell})", fld, verts, arrows, infinite=infinite)


def grassmann_quiver(m: int, unital: bool = True, base: FieldSpec | None = None) -> FullQuiver:
    """
    The glued cube of the Grassmann algebra on m generators.

    Vertices are subsets S of {1..m}; the edge S → S∪{i} carries generator
    class i with sign (−1)^{#{j ∈ S : j < i}}. The unital form glues all
    vertices; the radical form uses zero vertices.
    """
    if not 1 <= m <= len(GREEK):
        raise QuiverError(f"Grassmann quiver needs 1 <= m <= {len(GREEK)}", "INVALID_GRASSMANN")
    fld, infinite = _base(base)
    ring = Ring(fld)
    fdeg = None if infinite else 1

    def vid(mask: int) -> str:
        return "v" + "".join("1" if mask >> i & 1 else "0" for i in range(m))

    verts = tuple(
        Vertex(vid(mask), "I", 1, fdeg) if unital else Vertex(vid(mask), None, 1, None, zero=True)
        for mask in range(2**m)
    )
    arrows = []
    for mask in range(2**m):
        for i in range(m):
            if mask >> i & 1:
                continue
            below = bin(mask & ((1 << i) - 1)).count("1")
            nu = None if below % 2 == 0 else ring.constant(-1)
            arrows.append(
                Arrow(f"{vid(mask)}_{GREEK[i]}", vid(mask), vid(mask | 1 << i), GREEK[i], nu)
            )
    suffix = "+" if unital else ""
    return FullQuiver(
        f"G{m}{suffix}", fld, verts, tuple(arrows), infinite=infinite, imprimitive=GENERATED
    )
