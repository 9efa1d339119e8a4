"""
Quiver documents: the JSON codec and DOT export.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from graphviz import Digraph

from quiverforge.basering import (
    FINITE,
    FREE,
    NILPOTENT,
    FieldSpec,
    Indeterminate,
    Monomial,
    Ring,
    document_text,
    make_field,
    monomial_text,
    normalize_monomial,
    parse_element,
)
from quiverforge.config import ForgeConfig
from quiverforge.exceptions import DocumentError, QuiverForgeError
from quiverforge.quiver import (
    IMPRIMITIVE_MODES,
    Arrow,
    FullQuiver,
    Vertex,
    infinite_base,
    validate,
)
from quiverforge.relations import RelationSet

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
SUFFIX = ".quiver.json"

# Edge colors for arrow glue classes, cycled in order of first appearance.
PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#e377c2",
    "#17becf",
    "#bcbd22",
    "#7f7f7f",
)

_KINDS = (FREE, FINITE, NILPOTENT)


@dataclass
class QuiverDocument:
    """A parsed document: the quiver plus its optional expectation block."""

    quiver: FullQuiver
    expect: dict[str, Any] = field(default_factory=dict)
    description: str = ""


# Encoding


def _ring_dict(ring: Ring) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if ring.gens:
        out["coefficients"] = [
            {"name": g.name, "kind": g.kind, "group": g.group, "order": g.order}
            for g in ring.gens
        ]
    if ring.annihilators:
        out["annihilators"] = [monomial_text(m) for m in ring.annihilators]
    if ring.tag:
        out["ring_tag"] = ring.tag
    return out


def quiver_to_dict(q: FullQuiver) -> dict[str, Any]:
    """The document form of q (without an expectation block)."""
    base: dict[str, int] | str = "infinite" if q.infinite else {"p": q.field.p, "t": q.field.t}
    doc: dict[str, Any] = {"format_version": FORMAT_VERSION, "name": q.name, "base": base}
    doc["imprimitive"] = q.imprimitive
    if q.ring is not None:
        doc.update(_ring_dict(q.ring))
    doc["vertices"] = [
        {
            "id": v.id,
            "class": v.glue_class,
            "degree": v.degree,
            "field_deg": v.field_degree,
            "twist": v.twist,
            "zero": v.zero,
            "infinitesimals": list(v.infinitesimals),
        }
        for v in q.vertices
    ]
    arrows = []
    for a in q.arrows:
        item: dict[str, Any] = {
            "id": a.id,
            "from": a.src,
            "to": a.dst,
            "class": a.glue_class,
            "nu": "1" if a.nu is None else document_text(a.nu),
            "exponent": a.exponent,
        }
        if a.shift:
            item["shift"] = a.shift
        arrows.append(item)
    doc["arrows"] = arrows
    doc["relations"] = q.relations.text_lines(q.field)
    if q.frobenius_pairs:
        doc["frobenius_pairs"] = [list(p) for p in q.frobenius_pairs]
    return doc


def dumps(q: FullQuiver, expect: Mapping[str, Any] | None = None, description: str = "") -> str:
    doc = quiver_to_dict(q)
    if description:
        doc["description"] = description
    if expect:
        doc["expect"] = dict(expect)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def save(q: FullQuiver, path: Path, expect: Mapping[str, Any] | None = None) -> None:
    path.write_text(dumps(q, expect), encoding="utf-8")
    logger.info(f"Wrote {q.name} to {path}")


# Decoding


class _Reader:
    """Typed field access with the JSON path in every error."""

    def __init__(self, data: Mapping[str, Any], where: str):
        self.data = data
        self.where = where

    def get(self, key: str, kind: type | tuple[type, ...], default: Any = ...) -> Any:
        if key not in self.data:
            if default is ...:
                raise DocumentError(f"{self.where}: missing field {key!r}", "MISSING_FIELD")
            return default
        value = self.data[key]
        if value is None and default is None:
            return None
        # bool is an int subclass; reject it where a number is wanted
        if not isinstance(value, kind) or (isinstance(value, bool) and bool not in _as_tuple(kind)):
            raise DocumentError(
                f"{self.where}.{key}: expected {_type_names(kind)}, got {value!r}", "INVALID_FIELD"
            )
        return value


def _as_tuple(kind: type | tuple[type, ...]) -> tuple[type, ...]:
    return kind if isinstance(kind, tuple) else (kind,)


def _type_names(kind: type | tuple[type, ...]) -> str:
    return " or ".join(k.__name__ for k in _as_tuple(kind))


def _base_field(doc: _Reader, config: ForgeConfig) -> tuple[FieldSpec, bool]:
    base = doc.data.get("base")
    if base == "infinite":
        return infinite_base(config.kproxy_prime), True
    if not isinstance(base, Mapping):
        raise DocumentError(
            f"{doc.where}.base: expected {{'p': ..., 't': ...}} or 'infinite', got {base!r}",
            "INVALID_FIELD",
        )
    spec = _Reader(base, f"{doc.where}.base")
    p, t = spec.get("p", int), spec.get("t", int, 1)
    try:
        return make_field(p, t, bound=config.field_bound), False
    except QuiverForgeError as e:
        raise DocumentError(f"{doc.where}.base: {e}", e.error_code or "INVALID_FIELD") from e


def _monomial(text: str, names: Mapping[str, Indeterminate], where: str) -> Monomial:
    exps: dict[Indeterminate, int] = {}
    for factor in text.split("*"):
        name, _, exp = factor.strip().partition("^")
        if name not in names:
            raise DocumentError(f"{where}: unknown generator {name!r}", "INVALID_RING_ELEMENT")
        try:
            exps[names[name]] = exps.get(names[name], 0) + (int(exp) if exp else 1)
        except ValueError as e:
            raise DocumentError(f"{where}: bad exponent in {text!r}", "INVALID_RING_ELEMENT") from e
    mono = normalize_monomial(exps)
    if mono is None:
        raise DocumentError(
            f"{where}: annihilator {text!r} is already zero", "INVALID_RING_ELEMENT"
        )
    return mono


def _coefficient_ring(doc: _Reader, fld: FieldSpec) -> Ring | None:
    specs = doc.get("coefficients", list, [])
    anns = doc.get("annihilators", list, [])
    tag = doc.get("ring_tag", str, "")
    if not specs and not anns and not tag:
        return None
    gens = []
    for k, item in enumerate(specs):
        r = _Reader(item, f"{doc.where}.coefficients[{k}]")
        kind = r.get("kind", str, FREE)
        if kind not in _KINDS:
            raise DocumentError(
                f"{r.where}.kind: must be one of {_KINDS}, got {kind!r}", "INVALID_FIELD"
            )
        gens.append(
            Indeterminate(
                r.get("name", str), kind, r.get("order", int, 0), r.get("group", str, "")
            )
        )
    names = {g.name: g for g in gens}
    monos = tuple(
        _monomial(text, names, f"{doc.where}.annihilators[{k}]") for k, text in enumerate(anns)
    )
    return Ring(fld, tuple(gens), monos, tag=tag)


def _vertex(item: Any, k: int) -> Vertex:
    if not isinstance(item, Mapping):
        raise DocumentError(f"vertices[{k}]: expected an object", "INVALID_FIELD")
    r = _Reader(item, f"vertices[{k}]")
    degree = r.get("degree", int, 1)
    if degree < 1:
        raise DocumentError(f"{r.where}.degree: must be positive, got {degree}", "INVALID_FIELD")
    return Vertex(
        id=r.get("id", str),
        glue_class=r.get("class", str, None),
        degree=degree,
        field_degree=r.get("field_deg", int, None),
        twist=r.get("twist", int, 0),
        zero=r.get("zero", bool, False),
        infinitesimals=tuple(r.get("infinitesimals", list, [])),
    )


def _arrow(item: Any, k: int, ring: Ring, vertex_ids: set[str]) -> Arrow:
    if not isinstance(item, Mapping):
        raise DocumentError(f"arrows[{k}]: expected an object", "INVALID_FIELD")
    r = _Reader(item, f"arrows[{k}]")
    src, dst = r.get("from", str), r.get("to", str)
    for end, vid in (("from", src), ("to", dst)):
        if vid not in vertex_ids:
            raise DocumentError(f"{r.where}.{end}: unknown vertex {vid!r}", "UNKNOWN_VERTEX")
    nu_text = str(r.get("nu", (str, int), "1"))
    try:
        nu = parse_element(nu_text, ring)
    except QuiverForgeError as e:
        raise DocumentError(f"{r.where}.nu: {e}", "INVALID_RING_ELEMENT") from e
    return Arrow(
        id=r.get("id", str),
        src=src,
        dst=dst,
        glue_class=r.get("class", str, None),
        nu=None if nu == nu.ring.one else nu,
        exponent=r.get("exponent", int, 0),
        shift=r.get("shift", int, 0),
    )


def _unique(ids: list[str], what: str) -> None:
    seen: set[str] = set()
    for x in ids:
        if x in seen:
            raise DocumentError(f"Duplicate {what} id {x!r}", "DUPLICATE_ID")
        seen.add(x)


def quiver_from_dict(
    data: Mapping[str, Any], config: ForgeConfig | None = None, check: bool = True
) -> QuiverDocument:
    """
    Build a quiver from its document form.

    Raises:
        DocumentError: On a missing or mistyped field (the message names the
            JSON path), an unsupported version, or, with ``check``, a quiver
            that fails validation.
    """
    config = config or ForgeConfig()
    if not isinstance(data, Mapping):
        raise DocumentError("Document must be a JSON object", "INVALID_FIELD")
    doc = _Reader(data, "$")
    version = doc.get("format_version", int)
    if version != FORMAT_VERSION:
        raise DocumentError(
            f"Unsupported format_version {version}, expected {FORMAT_VERSION}",
            "UNSUPPORTED_VERSION",
        )
    fld, infinite = _base_field(doc, config)
    imprimitive = doc.get("imprimitive", str, "free")
    if imprimitive not in IMPRIMITIVE_MODES:
        raise DocumentError(
            f"$.imprimitive: must be one of {IMPRIMITIVE_MODES}, got {imprimitive!r}",
            "INVALID_FIELD",
        )
    ring = _coefficient_ring(doc, fld)
    vertices = tuple(_vertex(item, k) for k, item in enumerate(doc.get("vertices", list)))
    _unique([v.id for v in vertices], "vertex")
    ids = {v.id for v in vertices}
    element_ring = ring or Ring(fld)
    arrows = tuple(
        _arrow(item, k, element_ring, ids) for k, item in enumerate(doc.get("arrows", list, []))
    )
    _unique([a.id for a in arrows], "arrow")
    try:
        relations = RelationSet.parse(doc.get("relations", list, []), fld)
    except QuiverForgeError as e:
        raise DocumentError(f"$.relations: {e}", "INVALID_RELATION") from e
    pairs = []
    for k, item in enumerate(doc.get("frobenius_pairs", list, [])):
        if not (isinstance(item, list) and len(item) == 3 and isinstance(item[2], int)):
            raise DocumentError(
                f"$.frobenius_pairs[{k}]: expected [r, s, exponent]", "INVALID_FIELD"
            )
        pairs.append((str(item[0]), str(item[1]), int(item[2])))
    q = FullQuiver(
        name=doc.get("name", str, "quiver"),
        field=fld,
        vertices=vertices,
        arrows=arrows,
        relations=relations,
        ring=ring,
        infinite=infinite,
        imprimitive=imprimitive,
        frobenius_pairs=tuple(pairs),
    )
    if check:
        report = validate(q)
        if not report.ok:
            listing = "; ".join(f"{v.kind}: {v.message}" for v in report.violations)
            logger.error(f"Document {q.name} does not validate: {listing}")
            raise DocumentError(f"Quiver {q.name} does not validate: {listing}", "INVALID_QUIVER")
    return QuiverDocument(q, dict(doc.get("expect", dict, {})), doc.get("description", str, ""))


def loads(text: str, config: ForgeConfig | None = None, check: bool = True) -> QuiverDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(
            f"Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", "INVALID_JSON"
        ) from e
    return quiver_from_dict(data, config, check)


def load(path: Path | str, config: ForgeConfig | None = None, check: bool = True) -> QuiverDocument:
    """
    Read a quiver document from disk.

    Raises:
        DocumentError: If the file cannot be read or parsed.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise DocumentError(f"Cannot read {path}: {e.strerror}", "UNREADABLE_DOCUMENT") from e
    try:
        return loads(text, config, check)
    except DocumentError as e:
        raise DocumentError(f"{path}: {e}", e.error_code or "DOCUMENT_ERROR") from e


# DOT export


def export_dot(q: FullQuiver) -> str:
    """
    Graphviz source for q. Vertices show class₍n,t₎, edges ν·class^{q^u},
    and each arrow glue class gets its own color.
    """
    dot = Digraph("quiver", comment=q.name)
    dot.attr(rankdir="LR")
    colors: dict[str, str] = {}
    for a in q.arrows:
        if a.glue_class is not None and a.glue_class not in colors:
            colors[a.glue_class] = PALETTE[len(colors) % len(PALETTE)]
    for v in q.vertices:
        dot.node(v.id, v.label(), shape="circle" if v.zero else "ellipse")
    for a in q.arrows:
        attrs = {"label": a.label()}
        if a.glue_class is not None:
            attrs["color"] = colors[a.glue_class]
            attrs["fontcolor"] = colors[a.glue_class]
        dot.edge(a.src, a.dst, **attrs)
    return dot.source
