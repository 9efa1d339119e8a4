"""
Quiver-improvement passes.

Every pass takes a full quiver and returns a PassResult: the rewritten
quiver, the postconditions that were checked on it, and one trace line per
rewrite. Passes never mutate their input.
"""

from __future__ import annotations

import dataclasses
import logging
import random
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import networkx as nx

from quiverforge.basering import (
    FREE,
    FieldSpec,
    Indeterminate,
    Monomial,
    Ring,
    RingElement,
    embed_scalar,
    make_boolfrob_ring,
    make_trunc_ring,
    monomial_text,
    normalize_monomial,
    trunc_basis,
)
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import BoundExceededError, PassError, QuiverForgeError, RingError
from quiverforge.linalg import EchelonSpace, Matrix
from quiverforge.materialize import coefficient_matrices, generic_element, materialize
from quiverforge.materialize import decompress as flatten_quiver
from quiverforge.quiver import (
    FREE_ENTRIES,
    GENERATED,
    Arrow,
    Branch,
    FullQuiver,
    branches,
    induced_subquiver,
    primitive_arrows,
    reverse,
    validate,
)
from quiverforge.relations import (
    RelationSet,
    SolvedForm,
    eliminate,
    is_proportional_statement,
    self_relation_degree,
)

logger = logging.getLogger(__name__)


@dataclass
class PassResult:
    """Output of one pass: the new quiver, its checked postconditions and the rewrite trace."""

    quiver: FullQuiver
    certificate: list[str] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def changed(self) -> bool:
        return bool(self.trace)


def _trace(name: str, step: int, **fields: object) -> str:
    line = " ".join([f"pass={name}", f"step={step}"] + [f"{k}={v}" for k, v in fields.items()])
    logger.info(line)
    return line


def _finish(name: str, result: PassResult) -> PassResult:
    """Validate the output and record it in the certificate."""
    report = validate(result.quiver)
    if not report.ok:
        first = report.violations[0]
        logger.error(f"Pass {name} produced an invalid quiver: {first.message}")
        raise PassError(
            f"Pass {name} produced an invalid quiver: {first.message}", "INVALID_OUTPUT"
        )
    result.certificate.append("output validates")
    return result


def _is_one(nu: RingElement) -> bool:
    return nu == nu.ring.one


def _label(nu: RingElement) -> RingElement | None:
    return None if _is_one(nu) else nu


def _lift(nu: RingElement | None, ring: Ring) -> RingElement | None:
    return None if nu is None else nu.with_ring(ring)


# Branch normalization


def normalize_branch(
    q: FullQuiver,
    branch: Branch | Sequence[str] | None = None,
    config: ForgeConfig | None = None,
) -> PassResult:
    """
    Conjugate by a diagonal scalar matrix so every ν on the branch becomes 1.

    Walking the branch, the scalar of each target vertex is the scalar of its
    source times the arrow's ν. Every arrow a: s→t of the quiver is rescaled
    by d_s/d_t; Frobenius exponents are untouched.

    Raises:
        PassError: If a branch label is not a nonzero scalar, or the rescaling
            would change an arrow glued outside the branch.
    """
    config = config or ForgeConfig()
    if branch is None:
        found = branches(q)
        if not found:
            return _finish("normalize", PassResult(q, ["no branch"]))
        branch = found[0]
    arrow_ids = list(branch.arrows if isinstance(branch, Branch) else branch)
    fld = q.field

    scaling: dict[str, int] = {}
    for aid in arrow_ids:
        a = q.arrow(aid)
        nu = q.nu(a)
        if not nu.is_scalar or nu.scalar == 0:
            raise PassError(
                f"Arrow {a.id} has label {nu}, which is not a nonzero scalar", "NON_SCALAR_LABEL"
            )
        scaling.setdefault(a.src, 1)
        if a.dst in scaling:
            raise PassError(f"Arrow ids {arrow_ids} do not form a path", "INVALID_BRANCH")
        scaling[a.dst] = fld.mul(scaling[a.src], nu.scalar)

    on_branch = set(arrow_ids)
    arrows: list[Arrow] = []
    trace: list[str] = []
    for a in q.arrows:
        ds, dt = scaling.get(a.src, 1), scaling.get(a.dst, 1)
        if ds == dt:
            arrows.append(a)
            continue
        if a.id not in on_branch and a.glue_class is not None:
            raise PassError(
                f"Arrow {a.id} of class {a.glue_class} lies outside the branch but would be "
                "rescaled",
                "CROSS_BRANCH_GLUING",
            )
        nu = q.nu(a).scale(fld.mul(ds, fld.inv(dt)))
        arrows.append(dataclasses.replace(a, nu=_label(nu)))
        if a.id in on_branch:
            trace.append(_trace("normalize", len(trace) + 1, arrow=a.id, factor=f"{ds}/{dt}"))

    out = q.replace(arrows=tuple(arrows))
    diagonal = [scaling.get(v.id, 1) for v in q.vertices]
    result = PassResult(out, trace=trace, notes={"diagonal": diagonal})
    if all(d == 1 for d in diagonal):
        result.certificate.append("identity change of basis")
    elif _conjugate(q, out, scaling, config):
        result.certificate.append("materializations conjugate by the diagonal matrix")
    else:
        result.certificate.append("conjugation not checked")
    return _finish("normalize", result)


def _conjugate(
    before: FullQuiver, after: FullQuiver, scaling: Mapping[str, int], config: ForgeConfig
) -> bool:
    """Whether D·A·D⁻¹ spans the algebra of ``after``, checked on coefficient matrices."""
    if any(v.infinitesimals for v in before.vertices):
        return False
    try:
        g1 = generic_element(before, config=config)
        g2 = generic_element(after, config=config)
    except QuiverForgeError as e:
        logger.debug(f"Skipping conjugation check: {e}")
        return False
    if g1.probabilistic:
        return False
    lay = g1.layout
    fld = before.field
    d = [scaling.get(lay.owner(i), 1) for i in range(lay.size)]
    conj = [
        Matrix.build(
            m.size,
            m.ring,
            {
                (i, j): x.scale(embed_scalar(fld.mul(d[i], fld.inv(d[j])), fld, m.ring.field))
                for (i, j), x in m.entries
            },
        )
        for m in coefficient_matrices(g1)
    ]
    targets = coefficient_matrices(g2)
    if not targets:
        return not conj
    space = EchelonSpace(fld, lay.size, targets[0].ring)
    space.extend(targets)
    image = EchelonSpace(fld, lay.size, targets[0].ring, space.coords)
    image.extend(conj)
    return image.dimension == space.dimension and all(space.contains(m) for m in conj)


# Compression


def _uniform(q: FullQuiver, arrows: Sequence[Arrow]) -> bool:
    """Same class, label and exponent, and no shift."""
    if any(a.shift for a in arrows):
        return False
    first = arrows[0]
    return all(
        q.class_of(a) == q.class_of(first)
        and q.nu(a) == q.nu(first)
        and a.exponent == first.exponent
        for a in arrows[1:]
    )


def _confined(q: FullQuiver, cls: str, allowed: set[str]) -> bool:
    """Every arrow of the class is among ``allowed`` and no relation mentions it."""
    if cls in q.relations.symbols():
        return False
    return all(a.id in allowed for a in q.arrows if q.class_of(a) == cls)


def _chains(q: FullQuiver, arrows: Sequence[Arrow]) -> list[tuple[str, ...]] | None:
    """Split edges into vertex-disjoint paths, or None if they branch."""
    succ: dict[str, str] = {}
    pred: dict[str, str] = {}
    for a in arrows:
        if a.src in succ or a.dst in pred:
            return None
        succ[a.src] = a.dst
        pred[a.dst] = a.src
    chains = []
    for start in sorted(set(succ) - set(pred), key=q.index.__getitem__):
        chain = [start]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        chains.append(tuple(chain))
    return chains


def _compress_class(q: FullQuiver, cls: str) -> tuple[FullQuiver, int, int] | None:
    """
    Compress the glued triangles of one vertex class, if they qualify.

    Returns:
        The rewritten quiver, the triangle length and the number of triangles.
    """
    members = {v.id for v in q.vertices if v.glue_class == cls and not v.zero}
    if len(members) < 2:
        return None
    groups: dict[str, list[Arrow]] = {}
    for a in q.arrows:
        if a.src in members and a.dst in members:
            groups.setdefault(q.class_of(a), []).append(a)

    best: tuple[int, FullQuiver, int] | None = None
    for kappa, arrows in groups.items():
        chains = _chains(q, arrows)
        if not chains or len({len(c) for c in chains}) != 1:
            continue
        ell = len(chains[0])
        if best is not None and ell <= best[0]:
            continue
        rewritten = _compress_triangles(q, kappa, chains)
        if rewritten is not None:
            best = (ell, rewritten, len(chains))
    if best is None:
        return None
    return best[1], best[0], best[2]


def _compress_triangles(
    q: FullQuiver, kappa: str, chains: list[tuple[str, ...]]
) -> FullQuiver | None:
    ell = len(chains[0])
    order = {a.id: k for k, a in enumerate(q.arrows)}
    pos = {vid: (t, i) for t, chain in enumerate(chains) for i, vid in enumerate(chain)}
    for chain in chains:
        shapes = {
            (v.degree, v.field_degree, v.twist, v.infinitesimals)
            for v in (q.vertex(x) for x in chain)
        }
        if len(shapes) != 1:
            return None

    internal: dict[int, list[Arrow]] = {}
    cross: dict[tuple[int, int], list[Arrow]] = {}
    outside: dict[tuple[int, str, bool], list[Arrow]] = {}
    for a in q.arrows:
        ps, pd = pos.get(a.src), pos.get(a.dst)
        if ps is None and pd is None:
            continue
        if ps is not None and pd is not None:
            if ps[0] == pd[0]:
                internal.setdefault(pd[1] - ps[1], []).append(a)
            else:
                cross.setdefault((ps[0], pd[0]), []).append(a)
        elif ps is not None:
            outside.setdefault((ps[0], a.dst, True), []).append(a)
        elif pd is not None:
            outside.setdefault((pd[0], a.src, False), []).append(a)

    ladder = internal.get(1, [])
    if not _uniform(q, ladder) or not _confined(q, kappa, {a.id for a in ladder}):
        return None
    for d in range(2, ell):
        arrows = internal.get(d, [])
        ids = {a.id for a in arrows}
        slots = len(chains) * (ell - d)
        if slots == 1 or (not arrows and q.imprimitive == GENERATED):
            if any(a.shift for a in arrows):
                return None
            if arrows and not _confined(q, q.class_of(arrows[0]), ids):
                return None
            continue
        if len(arrows) != slots or arrows[0].glue_class is None or not _uniform(q, arrows):
            return None
        if not _confined(q, q.class_of(arrows[0]), ids):
            return None

    replacement: dict[str, Arrow] = {}
    cross_ids = {a.id for arrows in cross.values() for a in arrows}
    signatures: dict[str, tuple[object, ...]] = {}
    for (ta, tb), arrows in cross.items():
        if (tb, ta) in cross or any(a.shift for a in arrows):
            return None
        by_pos = {(pos[a.src][1], pos[a.dst][1]): a for a in arrows}
        d0 = min(j - i for i, j in by_pos)
        want = {(i, j) for i in range(ell) for j in range(ell) if j - i >= d0}
        if d0 < 0 or set(by_pos) != want:
            return None
        diagonals = []
        for d in range(d0, ell):
            diag = [by_pos[(i, i + d)] for i in range(ell - d)]
            if len(diag) > 1 and (diag[0].glue_class is None or not _uniform(q, diag)):
                return None
            diagonals.append((q.class_of(diag[0]), q.nu(diag[0]), diag[0].exponent))
        classes = [c for c, _, _ in diagonals]
        if len(set(classes)) != len(classes):
            return None
        signature = (d0, tuple(diagonals))
        for c in classes:
            if signatures.setdefault(c, signature) != signature or not _confined(q, c, cross_ids):
                return None
        for c in classes[1:]:
            if c in q.relations.symbols():
                return None
        lead = by_pos[(0, d0)]
        first = min(arrows, key=lambda a: order[a.id])
        replacement[first.id] = Arrow(
            first.id,
            chains[ta][0],
            chains[tb][0],
            lead.glue_class,
            lead.nu,
            lead.exponent,
            shift=d0,
        )

    by_neighbour: dict[tuple[str, bool], list[Arrow]] = {}
    for (t, w, out), arrows in outside.items():
        if len(arrows) != ell:
            return None
        by_neighbour.setdefault((w, out), []).extend(arrows)
        first = min(arrows, key=lambda a: order[a.id])
        head = chains[t][0]
        replacement[first.id] = (
            dataclasses.replace(first, src=head) if out else dataclasses.replace(first, dst=head)
        )
    for arrows in by_neighbour.values():
        if arrows[0].glue_class is None or not _uniform(q, arrows):
            return None

    heads = {chain[0] for chain in chains}
    dropped = {vid for chain in chains for vid in chain[1:]}
    touched = {
        a.id
        for group in (*internal.values(), *cross.values(), *outside.values())
        for a in group
    }
    verts = tuple(
        dataclasses.replace(v, infinitesimals=v.infinitesimals + (ell,)) if v.id in heads else v
        for v in q.vertices
        if v.id not in dropped
    )
    arrows_out = []
    for a in q.arrows:
        if a.id in replacement:
            arrows_out.append(replacement[a.id])
        elif a.id not in touched:
            arrows_out.append(a)
    pairs = tuple(p for p in q.frobenius_pairs if p[0] not in dropped and p[1] not in dropped)
    return q.replace(vertices=verts, arrows=tuple(arrows_out), frobenius_pairs=pairs)


def compress(
    q: FullQuiver, order: Sequence[str] | None = None, seed: int | None = None
) -> PassResult:
    """
    Rewrite to the incompressible form.

    Vertex classes are visited in document order, in the given ``order``, or
    shuffled with ``seed``; each class whose glued triangles qualify is
    compressed and the scan restarts, until no class changes.
    """
    rng = random.Random(seed) if seed is not None else None
    current = q
    trace: list[str] = []
    while True:
        classes = list(current.vertex_classes())
        if order is not None:
            rank = {c: k for k, c in enumerate(order)}
            classes.sort(key=lambda c: rank.get(c, len(rank)))
        elif rng is not None:
            rng.shuffle(classes)
        for cls in classes:
            found = _compress_class(current, cls)
            if found is None:
                continue
            current, ell, count = found
            trace.append(_trace("compress", len(trace) + 1, cls=cls, length=ell, triangles=count))
            break
        else:
            break
    result = PassResult(current, trace=trace)
    result.certificate.append("no class has a compressible triangle")
    return _finish("compress", result)


def decompress(q: FullQuiver) -> PassResult:
    """Undo every compression: glued triangles of ordinary vertices."""
    flat = flatten_quiver(q)
    trace = []
    if flat is not q:
        trace.append(
            _trace("decompress", 1, vertices_before=len(q.vertices), vertices=len(flat.vertices))
        )
    result = PassResult(flat, ["no infinitesimal vertices"], trace)
    return _finish("decompress", result)


# Arrow trading and degenerate gluing


def _touching(q: FullQuiver, vid: str) -> list[Arrow]:
    return [a for a in q.arrows if vid in (a.src, a.dst)]


def _parallel_composite(
    q: FullQuiver, keep: Sequence[Arrow], other: Sequence[Arrow]
) -> tuple[RingElement, RingElement]:
    """Summed composite along two parallel paths and the prefix product of ``keep``."""
    prefix = q.coeff_ring.one
    for a in keep[:-1]:
        prefix = prefix * q.nu(a)
    total = prefix * q.nu(keep[-1])
    other_product = q.coeff_ring.one
    for a in other:
        other_product = other_product * q.nu(a)
    return total + other_product, prefix


def _merge_parallel(
    q: FullQuiver, keep: Sequence[Arrow], other: Sequence[Arrow], total: RingElement,
    prefix: RingElement,
) -> FullQuiver:
    """Keep one of two identically glued paths, carrying the summed composite on its last arrow."""
    try:
        last_nu = total * prefix.inverse()
    except RingError as e:
        raise PassError(f"Cannot divide by the label product {prefix}", "NON_SCALAR_LABEL") from e
    last = keep[-1]
    gone_arrows = {a.id for a in other}
    gone_vertices = {a.dst for a in other[:-1]}
    arrows = tuple(
        dataclasses.replace(a, nu=_label(last_nu)) if a.id == last.id else a
        for a in q.arrows
        if a.id not in gone_arrows
    )
    verts = tuple(v for v in q.vertices if v.id not in gone_vertices)
    pairs = tuple(
        p for p in q.frobenius_pairs if p[0] not in gone_vertices and p[1] not in gone_vertices
    )
    return q.replace(vertices=verts, arrows=arrows, frobenius_pairs=pairs)


def _parallel_ok(q: FullQuiver, keep: Sequence[Arrow], other: Sequence[Arrow]) -> str | None:
    """Why two paths cannot be merged, or None when they can."""
    if len(keep) != len(other) or keep[0].src != other[0].src or keep[-1].dst != other[-1].dst:
        return "paths do not share both ends"
    for a, b in zip(keep, other, strict=True):
        if q.class_of(a) != q.class_of(b) or a.exponent != b.exponent or a.shift or b.shift:
            return f"arrows {a.id} and {b.id} are not glued arrow for arrow"
    inner = {a.dst for a in other[:-1]}
    own = {a.id for a in other}
    for x, y in zip(keep[:-1], other[:-1], strict=True):
        u, v = q.vertex(x.dst), q.vertex(y.dst)
        if not q.glued(u, v) or u.twist != v.twist or u.id == v.id:
            return f"vertices {u.id} and {v.id} are not identically glued"
    for vid in inner:
        extra = [a.id for a in _touching(q, vid) if a.id not in own]
        if extra:
            return f"vertex {vid} is also touched by {', '.join(extra)}"
    if any(p[0] in inner or p[1] in inner for p in q.frobenius_pairs):
        return "an inner vertex carries an explicit Frobenius pair"
    return None


def trade_arrows(q: FullQuiver, pattern: tuple[str, str]) -> PassResult:
    """
    Trade two proportionally glued arrows for one.

    ``pattern`` names arrows a, b sharing a source (or a target) whose far
    endpoints are glued. When nothing else touches the far endpoints they
    merge into one vertex and a carries ν_a + ν_b; a zero sum removes the
    arrow and flags the degeneration. When the far endpoints continue to a
    common vertex through one glued pair of arrows (a diamond), the two
    paths are merged into one carrying the summed composite.

    Raises:
        PassError: If the pattern is not isolated, or a diamond's composite vanishes.
    """
    a, b = q.arrow(pattern[0]), q.arrow(pattern[1])
    if a.dst == b.dst and a.src != b.src:
        flipped = trade_arrows(reverse(q), pattern)
        flipped.quiver = reverse(flipped.quiver).replace(name=q.name)
        return flipped
    if a.src != b.src:
        raise PassError(
            f"Arrows {a.id} and {b.id} share neither source nor target", "NOT_A_PATTERN"
        )
    if q.class_of(a) != q.class_of(b) or a.glue_class is None or a.exponent != b.exponent:
        raise PassError(f"Arrows {a.id} and {b.id} are not proportionally glued", "NOT_A_PATTERN")
    t1, t2 = q.vertex(a.dst), q.vertex(b.dst)
    if not q.glued(t1, t2) or t1.twist != t2.twist:
        raise PassError(f"Far endpoints {t1.id} and {t2.id} are not glued", "NOT_A_PATTERN")
    if q.imprimitive == FREE_ENTRIES and q.in_arrows(a.src):
        raise PassError(
            f"Source {a.src} has incoming arrows whose free entries the trade would change",
            "NOT_ISOLATED",
        )

    rest1 = [x for x in _touching(q, t1.id) if x.id != a.id]
    rest2 = [x for x in _touching(q, t2.id) if x.id != b.id]
    if not rest1 and not rest2:
        total = q.nu(a) + q.nu(b)
        gone = {b.id} if total else {a.id, b.id}
        arrows = tuple(
            dataclasses.replace(x, nu=_label(total)) if x.id == a.id else x
            for x in q.arrows
            if x.id not in gone
        )
        out = q.replace(
            vertices=tuple(v for v in q.vertices if v.id != t2.id),
            arrows=arrows,
            frobenius_pairs=tuple(p for p in q.frobenius_pairs if t2.id not in p[:2]),
        )
        step = _trace("trade", 1, kind="fan", kept=a.id, removed=b.id, label=total)
        result = PassResult(out, trace=[step])
        if total:
            result.certificate.append(f"arrow {a.id} carries the summed label")
        else:
            result.certificate.append(f"degenerate: labels of {a.id} and {b.id} cancel")
            result.notes["degenerate"] = True
        return _finish("trade", result)

    diamond = (
        len(rest1) == 1
        and len(rest2) == 1
        and rest1[0].src == t1.id
        and rest2[0].src == t2.id
        and rest1[0].dst == rest2[0].dst
    )
    if not diamond:
        extra = ", ".join(x.id for x in rest1 + rest2)
        raise PassError(
            f"Far endpoints {t1.id}, {t2.id} are also touched by {extra}; trading would change "
            "the algebra",
            "NOT_ISOLATED",
        )
    keep, other = [a, rest1[0]], [b, rest2[0]]
    reason = _parallel_ok(q, keep, other)
    if reason is not None:
        raise PassError(f"Diamond at {a.src} cannot be traded: {reason}", "NOT_ISOLATED")
    total, prefix = _parallel_composite(q, keep, other)
    if not total:
        raise PassError(
            f"Composite through {t1.id} and {t2.id} vanishes; remove the degenerate gluing instead",
            "DEGENERATE_GLUING",
        )
    out = _merge_parallel(q, keep, other, total, prefix)
    step = _trace("trade", 1, kind="diamond", kept=t1.id, removed=t2.id, composite=total)
    result = PassResult(out, [f"path through {t1.id} carries the summed composite"], [step])
    return _finish("trade", result)


def degenerate_pairs(q: FullQuiver) -> list[tuple[Branch, Branch]]:
    """Pairs of branches with common ends that are glued identically, arrow for arrow."""
    found = branches(q)
    pairs = []
    for i, b1 in enumerate(found):
        for b2 in found[i + 1 :]:
            if b1.length < 2 or b1.length != b2.length:
                continue
            if b1.vertices[0] != b2.vertices[0] or b1.vertices[-1] != b2.vertices[-1]:
                continue
            keep = [q.arrow(x) for x in b1.arrows]
            other = [q.arrow(x) for x in b2.arrows]
            if [q.class_of(a) for a in keep] == [q.class_of(a) for a in other]:
                pairs.append((b1, b2))
    return pairs


def remove_degenerate_gluing(q: FullQuiver) -> PassResult:
    """
    Merge or separate identically glued parallel branches.

    With a nonzero summed composite the branches merge into one. Otherwise
    the kept branch's arrows are rescaled by fresh indeterminates ξ_i whose
    product is annihilated, and the other branch is dropped, so the quiver
    becomes a single path over F[ξ]/⟨ξ_1⋯ξ_L⟩.
    """
    current = q
    trace: list[str] = []
    skipped: list[str] = []
    while True:
        candidates = [
            (b1, b2)
            for b1, b2 in degenerate_pairs(current)
            if _parallel_ok(
                current,
                [current.arrow(x) for x in b1.arrows],
                [current.arrow(x) for x in b2.arrows],
            )
            is None
        ]
        if not candidates:
            skipped = [f"{b1.vertices}~{b2.vertices}" for b1, b2 in degenerate_pairs(current)]
            break
        b1, b2 = candidates[0]
        keep = [current.arrow(x) for x in b1.arrows]
        other = [current.arrow(x) for x in b2.arrows]
        total, prefix = _parallel_composite(current, keep, other)
        if total:
            current = _merge_parallel(current, keep, other, total, prefix)
            trace.append(_trace("degenerate", len(trace) + 1, kind="merge", kept=b1.vertices))
            continue
        current = _separate(current, keep, other)
        trace.append(_trace("degenerate", len(trace) + 1, kind="separate", kept=b1.vertices))
    result = PassResult(current, trace=trace)
    result.certificate.append("no mergeable degenerate branch pair remains")
    if skipped:
        result.notes["unresolved"] = skipped
    return _finish("degenerate", result)


def _separate(q: FullQuiver, keep: Sequence[Arrow], other: Sequence[Arrow]) -> FullQuiver:
    base = q.coeff_ring
    taken = {g.name for g in base.gens}
    start = 1
    while any(f"xi{start + k}" in taken for k in range(len(keep))):
        start += len(keep)
    xis = tuple(Indeterminate(f"xi{start + k}", FREE) for k in range(len(keep)))
    product: Monomial = tuple((x, 1) for x in sorted(xis))
    ring = Ring(
        base.field,
        tuple(sorted(set(base.gens) | set(xis))),
        tuple(sorted(set(base.annihilators) | {product})),
    )
    labels = {a.id: q.nu(a).with_ring(ring) * ring.var(x) for a, x in zip(keep, xis, strict=True)}
    gone_arrows = {a.id for a in other}
    gone_vertices = {a.dst for a in other[:-1]}
    arrows = tuple(
        dataclasses.replace(a, nu=labels[a.id] if a.id in labels else _lift(a.nu, ring))
        for a in q.arrows
        if a.id not in gone_arrows
    )
    return q.replace(
        ring=ring,
        arrows=arrows,
        vertices=tuple(v for v in q.vertices if v.id not in gone_vertices),
        frobenius_pairs=tuple(
            p for p in q.frobenius_pairs if p[0] not in gone_vertices and p[1] not in gone_vertices
        ),
    )


# Proportionalization


@dataclass(frozen=True)
class Summand:
    """θ·c·symbol^{q^frob}: one summand of a dispensable class."""

    theta: str
    symbol: str
    coeff: int
    frob: int = 0


@dataclass(frozen=True)
class DependenceTable:
    """Indispensable classes and the θ-expansion of every dispensable one."""

    indispensable: tuple[str, ...]
    dispensable: tuple[tuple[str, tuple[Summand, ...]], ...] = ()
    vanishing: tuple[str, ...] = ()

    @property
    def theta_count(self) -> int:
        return sum(len(terms) for _, terms in self.dispensable)

    def summands(self, cls: str) -> int:
        """k(α) for a dispensable class."""
        return len(dict(self.dispensable).get(cls, ()))


def dependence_table(solved: SolvedForm, extra: Sequence[tuple[str, Any]] = ()) -> DependenceTable:
    """Number one θ per (dispensable class, summand) pair, in symbol order."""
    dispensable = []
    vanishing = []
    k = 0
    for sym, expr in [*solved.dependents, *extra]:
        if not expr.terms:
            vanishing.append(sym)
            continue
        terms = []
        for term in expr.terms:
            k += 1
            terms.append(Summand(f"theta{k}", term.symbol, term.coeff, term.frob))
        dispensable.append((sym, tuple(terms)))
    dependent = {sym for sym, _ in dispensable} | set(vanishing)
    indispensable = tuple(s for s in solved.symbols if s not in dependent)
    return DependenceTable(indispensable, tuple(dispensable), tuple(vanishing))


def qpoly_eliminate(
    rels: RelationSet,
    truncation: int,
    fld: FieldSpec,
    q: int | None = None,
    symbols: Sequence[str] | None = None,
) -> SolvedForm:
    """
    Solve a q-polynomial system for a set of independent symbols.

    Raises:
        PassError: If the truncation is not positive.
    """
    solved = eliminate(rels, fld, truncation, symbols=symbols, q=q)
    for step, (sym, expr) in enumerate(solved.dependents, start=1):
        _trace("qpoly_eliminate", step, symbol=sym, value=f"'{expr.text(fld)}'")
    for sym, s in solved.self_relations:
        logger.info(f"pass=qpoly_eliminate self_relation={sym} degree={s}")
    return solved


def _expand(
    q: FullQuiver,
    table: DependenceTable,
    ell: int,
    config: ForgeConfig,
    name: str,
    extra: Ring | None = None,
    relations: RelationSet = RelationSet(),
) -> tuple[FullQuiver, list[str]]:
    """Copy every vertex over the θ monomial basis and route dispensable classes along θ."""
    fld = q.field
    theta = make_trunc_ring(table.theta_count, ell, fld, bound=config.trunc_basis_bound)
    base = q.coeff_ring
    ring = theta if not base.gens else base.merge(theta)
    if extra is not None:
        ring = ring.merge(extra)
    monos = trunc_basis(theta)
    gens = {g.name: g for g in theta.gens}

    def copy(vid: str, mono: Monomial) -> str:
        return f"{vid}|{monomial_text(mono)}"

    verts = []
    for v in q.vertices:
        cls = None if v.zero else (v.glue_class or f"{v.id}~")
        verts.extend(
            dataclasses.replace(v, id=copy(v.id, mono), glue_class=cls) for mono in monos
        )

    expansions = dict(table.dispensable)
    vanishing = set(table.vanishing)
    trace: list[str] = []
    arrows = []
    for a in q.arrows:
        cls = q.class_of(a)
        if cls in vanishing:
            trace.append(_trace(name, len(trace) + 1, arrow=a.id, action="removed"))
            continue
        if cls not in expansions:
            arrows.extend(
                dataclasses.replace(
                    a,
                    id=copy(a.id, mono),
                    src=copy(a.src, mono),
                    dst=copy(a.dst, mono),
                    glue_class=a.glue_class or f"{a.id}~",
                    nu=_lift(a.nu, ring),
                )
                for mono in monos
            )
            continue
        for s in expansions[cls]:
            var = gens[s.theta]
            nu = ring.var(var).scale(s.coeff) * q.nu(a).with_ring(ring)
            for mono in monos:
                target = dict(mono)
                target[var] = target.get(var, 0) + 1
                shifted = normalize_monomial(target)
                if shifted is None:
                    continue
                arrows.append(
                    Arrow(
                        f"{a.id}|{monomial_text(mono)}|{s.theta}",
                        copy(a.src, mono),
                        copy(a.dst, shifted),
                        s.symbol,
                        nu,
                        a.exponent + s.frob,
                    )
                )
            trace.append(
                _trace(
                    name, len(trace) + 1, arrow=a.id, family=f"{s.theta}*{s.symbol}", frob=s.frob
                )
            )

    pairs = tuple((copy(r, m), copy(s, m), u) for r, s, u in q.frobenius_pairs for m in monos)
    out = q.replace(
        name=f"{q.name}/{name}",
        vertices=tuple(verts),
        arrows=tuple(arrows),
        relations=relations,
        ring=ring,
        frobenius_pairs=pairs,
    )
    return out, trace


def _no_double_arrows(q: FullQuiver) -> bool:
    primitive, _ = primitive_arrows(q)
    pairs = [(a.src, a.dst) for a in q.arrows if a.id in primitive]
    return len(pairs) == len(set(pairs))


def proportionalize(q: FullQuiver, config: ForgeConfig | None = None) -> PassResult:
    """
    Replace linear dependences among arrow classes by proportional gluing.

    Gauss elimination splits the classes into indispensable and dispensable
    ones, one θ per summand. Over C = Trunc(#θ, m), with m the nilpotence
    index, every vertex v becomes the copies v⊗θ̃; indispensable arrows are
    copied along each θ̃ and each summand θ·c·β of a dispensable class is
    routed v⊗θ̃ → w⊗θθ̃ in the class of β.

    Raises:
        PassError: On nonlinear relations or a failed certificate.
    """
    config = config or ForgeConfig()
    if not q.relations:
        return _finish("proportionalize", PassResult(q, ["no relations"]))
    if not q.relations.is_linear:
        raise PassError(
            f"Quiver {q.name} has Frobenius relations; use frobenius_proportionalize",
            "NONLINEAR_RELATIONS",
        )
    solved = qpoly_eliminate(q.relations, 1, q.field, symbols=list(q.arrow_classes()))
    if solved.constraints:
        raise PassError(
            f"Relation {solved.constraints[0].text(q.field)} has no pivot", "UNSOLVABLE_RELATION"
        )
    table = dependence_table(solved)
    m = materialize(q, config).nilpotence_index
    logger.info(f"Proportionalizing {q.name}: {table.theta_count} theta symbols, m = {m}")
    kept = q.relations.without(sym for sym, _ in table.dispensable)
    out, trace = _expand(q, table, m, config, "proportionalize", relations=kept)
    result = PassResult(out, trace=trace, notes={"table": table, "nilpotence_index": m})
    _certify_proportional(result, allow_self=False)
    return _finish("proportionalize", result)


def _certify_proportional(result: PassResult, allow_self: bool) -> None:
    q = result.quiver
    for rel in q.relations:
        ok = is_proportional_statement(rel) or (
            allow_self and self_relation_degree(rel, q.field) is not None
        )
        if not ok:
            raise PassError(
                f"Relation {rel.text(q.field)} is not a proportional statement",
                "CERTIFICATE_FAILED",
            )
    result.certificate.append("relations are proportional gluing statements")
    if q.imprimitive == FREE_ENTRIES:
        if not _no_double_arrows(q):
            raise PassError("Two primitive arrows join the same vertex pair", "CERTIFICATE_FAILED")
        result.certificate.append("no two primitive arrows join the same vertex pair")


def frobenius_proportionalize(q: FullQuiver, config: ForgeConfig | None = None) -> PassResult:
    """
    Proportionalize q-polynomial relations over a finite base.

    Solved classes are expanded as in proportionalize, each family carrying
    the Frobenius exponent of its summand. Constraints without a clean pivot
    are expanded through their truncated q-power series (flagged); pure
    self-relations x = x^{q^s} stay as finite-type declarations with one
    Boolean-Frobenius symbol ψ each.

    Raises:
        PassError: Over K.
        BoundExceededError: If q^truncation exceeds the field bound.
    """
    config = config or ForgeConfig()
    if q.infinite:
        raise PassError("Frobenius proportionalization needs a finite base", "INFINITE_BASE")
    rels = q.relations
    if all(
        is_proportional_statement(r) or self_relation_degree(r, q.field) is not None for r in rels
    ):
        result = PassResult(q, ["relations are already Frobenius-proportional"])
        return _finish("frobprop", result)

    m = materialize(q, config).nilpotence_index
    depth = max(r.max_frob for r in rels) + 1
    truncation = depth * m
    if q.q**truncation > config.field_bound:
        raise BoundExceededError(
            f"Truncation q^{truncation} exceeds the field bound {config.field_bound}",
            "TRUNCATION_TOO_LARGE",
        )
    solved = qpoly_eliminate(rels, truncation, q.field, q=q.q, symbols=list(q.arrow_classes()))
    table = dependence_table(solved, extra=solved.series)
    selfs = [sym for sym, _ in solved.self_relations]
    extra = make_boolfrob_ring(q.q, len(selfs), q.field) if selfs else None
    kept = RelationSet(
        tuple(c for c in solved.constraints if self_relation_degree(c, q.field) is not None)
    )
    if table.theta_count == 0:
        result = PassResult(q.replace(relations=kept), ["only self-relations remain"])
        return _finish("frobprop", result)
    out, trace = _expand(q, table, m, config, "frobprop", extra=extra, relations=kept)
    notes: dict[str, Any] = {
        "table": table,
        "nilpotence_index": m,
        "truncation": truncation,
        "truncated": solved.truncated or bool(solved.series),
        "finite_type": {sym: f"psi{k}" for k, sym in enumerate(selfs, start=1)},
    }
    result = PassResult(out, trace=trace, notes=notes)
    _certify_proportional(result, allow_self=True)
    if notes["truncated"]:
        result.certificate.append(f"q-power series truncated beyond q^{truncation}")
    return _finish("frobprop", result)


# Geometric decomposition


def geometric_decomposition(q: FullQuiver) -> list[FullQuiver]:
    """
    Split q into parts closed under arrow gluing.

    Two arrow classes are linked when some branch contains arrows of both (a
    non-primitive arrow counts for every branch through both its ends). The
    parts are the maximal cliques of that graph; isolated vertices join the
    first part.
    """
    doc = {a.id: k for k, a in enumerate(q.arrows)}
    classes: dict[str, list[Arrow]] = {}
    for a in q.arrows:
        classes.setdefault(q.class_of(a), []).append(a)
    if not classes:
        return [q]
    primitive, _ = primitive_arrows(q)
    g = nx.Graph()
    g.add_nodes_from(classes)
    for b in branches(q):
        on_branch = {q.class_of(q.arrow(x)) for x in b.arrows}
        position = {v: k for k, v in enumerate(b.vertices)}
        for a in q.arrows:
            if a.id in primitive:
                continue
            if a.src in position and a.dst in position and position[a.src] < position[a.dst]:
                on_branch.add(q.class_of(a))
        ordered = sorted(on_branch)
        g.add_edges_from((x, y) for i, x in enumerate(ordered) for y in ordered[i + 1 :])
    cliques = [sorted(c) for c in nx.find_cliques(g)]
    cliques.sort(key=lambda c: sorted(doc[a.id] for cls in c for a in classes[cls]))
    covered: set[str] = set()
    parts = []
    for k, clique in enumerate(cliques, start=1):
        ids = [a.id for cls in clique for a in classes[cls]]
        verts = {v for x in ids for v in (q.arrow(x).src, q.arrow(x).dst)}
        covered |= verts
        parts.append((verts, ids, f"{q.name}/part{k}"))
    lonely = {v.id for v in q.vertices} - covered
    if lonely:
        verts, ids, name = parts[0]
        parts[0] = (verts | lonely, ids, name)
    result = [induced_subquiver(q, verts, ids, name) for verts, ids, name in parts]
    logger.info(f"Geometric decomposition of {q.name}: {len(result)} parts")
    return result


def is_geometrically_indecomposable(q: FullQuiver) -> bool:
    return len(geometric_decomposition(q)) == 1


# Pipelines


def _pass_table() -> dict[str, Callable[..., PassResult]]:
    return {
        "normalize": normalize_branch,
        "compress": compress,
        "decompress": decompress,
        "trade": trade_arrows,
        "degenerate": remove_degenerate_gluing,
        "proportionalize": proportionalize,
        "frobprop": frobenius_proportionalize,
    }


PASS_NAMES = tuple(_pass_table())


def run_pipeline(
    q: FullQuiver,
    passes: Sequence[str | tuple[str, Mapping[str, Any]]],
    config: ForgeConfig | None = None,
) -> PassResult:
    """
    Run passes in order, feeding each output to the next.

    Each entry is a pass name or (name, parameters). Certificates and traces
    are concatenated, prefixed with the pass name.

    Raises:
        PassError: On an unknown pass name.
    """
    config = config or ForgeConfig()
    table = _pass_table()
    combined = PassResult(q)
    current = q
    for entry in passes:
        name, params = (entry, {}) if isinstance(entry, str) else (entry[0], dict(entry[1]))
        if name not in table:
            raise PassError(
                f"Unknown pass {name!r}; choose from {', '.join(PASS_NAMES)}", "UNKNOWN_PASS"
            )
        fn = table[name]
        if name in ("normalize", "proportionalize", "frobprop"):
            params.setdefault("config", config)
        result = fn(current, **params)
        current = result.quiver
        combined.certificate.extend(f"{name}: {c}" for c in result.certificate)
        combined.trace.extend(result.trace)
        combined.notes[name] = result.notes
    combined.quiver = current
    return combined

