"""
q-polynomial relations among arrow classes and coordinates.

A relation is a formal sum Σ c·x^{q^j} = 0 with scalar coefficients from the
base field GF(q); q-powers fix those coefficients, so shifting a relation by
a q-power only moves exponents.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

from quiverforge.basering import FieldSpec, embed_scalar, parse_scalar, scalar_text
from quiverforge.exceptions import PassError, PolynomialSyntaxError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class QTerm:
    """c·symbol^{q^frob}."""

    symbol: str
    frob: int = 0
    coeff: int = 1


@dataclass(frozen=True)
class QRelation:
    """
    A q-polynomial with zero constant term, read as "= 0" when used as a relation
    and as an expression when it is the right-hand side of a solved symbol.

    Terms keep the order of first appearance; equal (symbol, frob) pairs are merged.
    """

    terms: tuple[QTerm, ...] = ()

    @classmethod
    def of(cls, terms: Iterable[QTerm], fld: FieldSpec) -> QRelation:
        acc: dict[tuple[str, int], int] = {}
        for term in terms:
            key = (term.symbol, term.frob)
            acc[key] = fld.add(acc.get(key, 0), term.coeff)
        return cls(tuple(QTerm(s, f, c) for (s, f), c in acc.items() if c))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[QTerm]:
        return iter(self.terms)

    def symbols(self) -> list[str]:
        seen: list[str] = []
        for term in self.terms:
            if term.symbol not in seen:
                seen.append(term.symbol)
        return seen

    def frobs(self, symbol: str) -> list[int]:
        return [t.frob for t in self.terms if t.symbol == symbol]

    def canonical(self) -> tuple[QTerm, ...]:
        return tuple(sorted(self.terms))

    @property
    def min_frob(self) -> int:
        return min((t.frob for t in self.terms), default=0)

    @property
    def max_frob(self) -> int:
        return max((t.frob for t in self.terms), default=0)

    @property
    def is_linear(self) -> bool:
        return all(t.frob == 0 for t in self.terms)

    def shifted(self, u: int) -> QRelation:
        """Apply x ↦ x^{q^u}; negative u is the q^{-u}-th root."""
        if any(t.frob + u < 0 for t in self.terms):
            raise PassError(f"Cannot shift {self.terms} by {u}", "INVALID_SHIFT")
        return QRelation(tuple(QTerm(t.symbol, t.frob + u, t.coeff) for t in self.terms))

    def normalized(self) -> QRelation:
        """Shift so the lowest q-power is q^0."""
        return self.shifted(-self.min_frob) if self.terms else self

    def scaled(self, c: int, fld: FieldSpec) -> QRelation:
        return QRelation(tuple(QTerm(t.symbol, t.frob, fld.mul(t.coeff, c)) for t in self.terms))

    def plus(self, other: QRelation, fld: FieldSpec) -> QRelation:
        return QRelation.of(self.terms + other.terms, fld)

    def substitute(
        self, symbol: str, expr: QRelation, fld: FieldSpec, truncation: int | None = None
    ) -> tuple[QRelation, bool]:
        """
        Replace symbol^{q^k} by expr^{q^k} everywhere.

        Returns:
            The new polynomial and whether terms beyond q^truncation were discarded.
        """
        out: list[QTerm] = []
        truncated = False
        for term in self.terms:
            if term.symbol != symbol:
                out.append(term)
                continue
            for sub in expr.terms:
                frob = sub.frob + term.frob
                if truncation is not None and frob > truncation:
                    truncated = True
                    continue
                out.append(QTerm(sub.symbol, frob, fld.mul(term.coeff, sub.coeff)))
        return QRelation.of(out, fld), truncated

    def evaluate(self, values: Mapping[str, int], fld: FieldSpec, q: int) -> int:
        """Value at a point of fld, with q the order of the coefficient field."""
        total = 0
        for term in self.terms:
            x = values[term.symbol]
            total = fld.add(total, fld.mul(term.coeff, fld.power(x, q**term.frob)))
        return total

    def rename(self, mapping: Mapping[str, str]) -> QRelation:
        return QRelation(
            tuple(QTerm(mapping.get(t.symbol, t.symbol), t.frob, t.coeff) for t in self.terms)
        )

    def text(self, fld: FieldSpec) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, term in enumerate(self.terms):
            coeff = term.coeff
            sign = "+"
            if fld.t == 1 and fld.p != 2 and coeff > fld.p // 2:
                sign, coeff = "-", fld.p - coeff
            if fld.t == 1:
                ctext = "" if coeff == 1 else f"{coeff}*"
            else:
                ctext = "" if coeff == 1 else f"{scalar_text(coeff, fld)}*"
            power = "" if term.frob == 0 else ("^q" if term.frob == 1 else f"^{{q^{term.frob}}}")
            body = f"{ctext}{term.symbol}{power}"
            if i == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)


_TERM = re.compile(
    r"\s*([+-])?\s*"
    r"(?:(GF\(\d+\^\d+\)\{[^}]*\}|\d+)\s*\*?\s*)?"
    r"([A-Za-z_][\w.~']*)"
    r"(?:\^(?:q\^(\d+)|\{q\^(\d+)\}|\{q\}|q))?\s*"
)


def parse_qpolynomial(text: str, fld: FieldSpec) -> QRelation:
    """
    Read "alpha - beta - gamma^q", "2*x + y^{q^2}" or "lhs = rhs".

    Raises:
        PolynomialSyntaxError: On malformed text.
    """
    if "=" in text:
        lhs, _, rhs = text.partition("=")
        left = parse_qpolynomial(lhs, fld)
        right = parse_qpolynomial(rhs, fld)
        return left.plus(right.scaled(fld.neg(1), fld), fld)
    terms: list[QTerm] = []
    pos = 0
    text = text.strip()
    if text == "0":
        return QRelation()
    while pos < len(text):
        match = _TERM.match(text, pos)
        if not match or match.end() == pos:
            raise PolynomialSyntaxError(
                f"Malformed q-polynomial at position {pos}: {text!r}", "INVALID_RELATION"
            )
        if terms and not match.group(1):
            raise PolynomialSyntaxError(
                f"Missing operator at position {pos}: {text!r}", "INVALID_RELATION"
            )
        coeff = parse_scalar(match.group(2), fld) if match.group(2) else 1
        if match.group(1) == "-":
            coeff = fld.neg(coeff)
        if match.group(4) or match.group(5):
            frob = int(match.group(4) or match.group(5))
        elif match.group(0).rstrip().endswith(("^q", "{q}")):
            frob = 1
        else:
            frob = 0
        terms.append(QTerm(match.group(3), frob, coeff))
        pos = match.end()
    relation = QRelation.of(terms, fld)
    if not terms:
        raise PolynomialSyntaxError(f"Empty q-polynomial: {text!r}", "INVALID_RELATION")
    return relation


@dataclass(frozen=True)
class RelationSet:
    """An ordered collection of q-polynomial relations."""

    relations: tuple[QRelation, ...] = ()

    @classmethod
    def parse(cls, lines: Iterable[str], fld: FieldSpec) -> RelationSet:
        rels = [parse_qpolynomial(line, fld) for line in lines]
        return cls(tuple(r for r in rels if r))

    def __iter__(self) -> Iterator[QRelation]:
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)

    def __bool__(self) -> bool:
        return bool(self.relations)

    def symbols(self) -> list[str]:
        """Symbols in order of first appearance."""
        seen: list[str] = []
        for rel in self.relations:
            for sym in rel.symbols():
                if sym not in seen:
                    seen.append(sym)
        return seen

    @property
    def is_linear(self) -> bool:
        return all(r.is_linear for r in self.relations)

    def text_lines(self, fld: FieldSpec) -> list[str]:
        return [r.text(fld) for r in self.relations]

    def rename(self, mapping: Mapping[str, str]) -> RelationSet:
        return RelationSet(tuple(r.rename(mapping) for r in self.relations))

    def restrict(self, symbols: Iterable[str]) -> RelationSet:
        """Relations that only involve the given symbols."""
        keep = set(symbols)
        return RelationSet(tuple(r for r in self.relations if set(r.symbols()) <= keep))

    def without(self, symbols: Iterable[str]) -> RelationSet:
        """Drop every relation touching one of the symbols."""
        drop = set(symbols)
        return RelationSet(tuple(r for r in self.relations if not set(r.symbols()) & drop))

    def holds(self, values: Mapping[str, int], fld: FieldSpec, q: int) -> bool:
        return all(r.evaluate(values, fld, q) == 0 for r in self.relations)


def is_proportional_statement(rel: QRelation) -> bool:
    """x^{q^a} = ν·y^{q^b} between two distinct symbols."""
    return len(rel.terms) == 2 and rel.terms[0].symbol != rel.terms[1].symbol


def self_relation_degree(rel: QRelation, fld: FieldSpec) -> int | None:
    """s when the relation is c·(x − x^{q^s}) after normalization, otherwise None."""
    norm = rel.normalized()
    if len(norm.terms) != 2 or norm.terms[0].symbol != norm.terms[1].symbol:
        return None
    a, b = sorted(norm.terms, key=lambda t: t.frob)
    if a.frob != 0 or b.frob == 0 or fld.add(a.coeff, b.coeff) != 0:
        return None
    return b.frob


@dataclass(frozen=True)
class SolvedForm:
    """
    Result of eliminating a system of q-polynomial relations.

    ``dependents`` maps each eliminated symbol to a q-polynomial in the
    independent symbols. ``constraints`` are the relations that could not be
    solved for a clean pivot; ``self_relations`` names the pure x = x^{q^s}
    ones. ``series`` holds the truncated q-power series expressing the lead
    symbol of each remaining constraint.
    """

    field: FieldSpec
    q: int
    symbols: tuple[str, ...]
    dependents: tuple[tuple[str, QRelation], ...] = ()
    constraints: tuple[QRelation, ...] = ()
    self_relations: tuple[tuple[str, int], ...] = ()
    series: tuple[tuple[str, QRelation], ...] = ()
    truncated: bool = False
    truncation: int = 0

    @property
    def independent(self) -> tuple[str, ...]:
        dep = {s for s, _ in self.dependents}
        return tuple(s for s in self.symbols if s not in dep)

    @property
    def constrained(self) -> tuple[str, ...]:
        syms: list[str] = []
        for rel in self.constraints:
            for s in rel.symbols():
                if s not in syms:
                    syms.append(s)
        return tuple(syms)

    def dependent_map(self) -> dict[str, QRelation]:
        return dict(self.dependents)

    def solutions(self, fld: FieldSpec) -> set[tuple[int, ...]]:
        """
        Exact solution set over an extension fld of the coefficient field,
        as tuples ordered like ``symbols``.
        """
        indep = self.independent
        points = set()
        coeff_field = self.field
        for values in itertools.product(fld.elements(), repeat=len(indep)):
            point = dict(zip(indep, values, strict=True))
            if any(_evaluate(c, point, coeff_field, fld, self.q) for c in self.constraints):
                continue
            for sym, expr in self.dependents:
                point[sym] = _evaluate(expr, point, coeff_field, fld, self.q)
            points.add(tuple(point[s] for s in self.symbols))
        return points


def _evaluate(
    rel: QRelation, point: Mapping[str, int], coeff_field: FieldSpec, fld: FieldSpec, q: int
) -> int:
    total = 0
    for term in rel.terms:
        c = embed_scalar(term.coeff, coeff_field, fld)
        total = fld.add(total, fld.mul(c, fld.power(point[term.symbol], q**term.frob)))
    return total


def enumerate_solutions(
    rels: RelationSet, symbols: Sequence[str], coeff_field: FieldSpec, fld: FieldSpec, q: int
) -> set[tuple[int, ...]]:
    """Brute-force solution set over fld; the oracle for SolvedForm.solutions."""
    points = set()
    for values in itertools.product(fld.elements(), repeat=len(symbols)):
        point = dict(zip(symbols, values, strict=True))
        if all(_evaluate(r, point, coeff_field, fld, q) == 0 for r in rels):
            points.add(tuple(values))
    return points


def _clean_pivot(rel: QRelation) -> QTerm | None:
    for term in rel.terms:
        if term.frob == 0 and len(rel.frobs(term.symbol)) == 1:
            return term
    return None


def _series(rel: QRelation, fld: FieldSpec, truncation: int) -> tuple[str, QRelation] | None:
    """Iterate x = −(1/c)·(rest) on a constraint, discarding q-powers beyond the truncation."""
    lead = next((t for t in rel.terms if t.frob == 0), None)
    if lead is None:
        return None
    x = lead.symbol
    rhs = QRelation(tuple(t for t in rel.terms if t is not lead)).scaled(
        fld.neg(fld.inv(lead.coeff)), fld
    )
    expr = rhs
    for _ in range(truncation):
        expr, _ = expr.substitute(x, rhs, fld, truncation)
        if x not in expr.symbols():
            break
    expr = QRelation(tuple(t for t in expr.terms if t.symbol != x))
    return x, expr


def eliminate(
    rels: RelationSet,
    fld: FieldSpec,
    truncation: int,
    symbols: Sequence[str] | None = None,
    q: int | None = None,
) -> SolvedForm:
    """
    Solve a q-polynomial system by substitution along clean pivots.

    A pivot is clean when its symbol occurs once in the relation, at q^0; a
    relation with no clean pivot is kept as a constraint. Substituted terms
    of q-degree above q^truncation are discarded and flagged.

    Raises:
        PassError: If the truncation is not positive.
    """
    if truncation <= 0:
        raise PassError(f"Truncation must be positive, got {truncation}", "INVALID_TRUNCATION")
    q = q or fld.order
    order = list(symbols) if symbols is not None else rels.symbols()
    for sym in rels.symbols():
        if sym not in order:
            order.append(sym)
    pending = [r.normalized() for r in rels if r]
    dependents: list[tuple[str, QRelation]] = []
    constraints: list[QRelation] = []
    truncated = False

    while pending:
        rel = pending.pop(0)
        if not rel:
            continue
        rel = rel.normalized()
        pivot = _clean_pivot(rel)
        if pivot is None:
            logger.debug(f"Relation {rel.text(fld)} has no clean pivot; kept as constraint")
            constraints.append(rel)
            continue
        rest = QRelation(tuple(t for t in rel.terms if t is not pivot))
        expr = rest.scaled(fld.neg(fld.inv(pivot.coeff)), fld)
        x = pivot.symbol

        def subst(target: QRelation, x: str = x, expr: QRelation = expr) -> QRelation:
            nonlocal truncated
            out, cut = target.substitute(x, expr, fld, truncation)
            truncated = truncated or cut
            return out

        dependents = [(s, subst(e)) for s, e in dependents]
        pending = [subst(r) for r in pending]
        constraints = [subst(c) for c in constraints]
        dependents.append((x, expr))

    constraints = [c.normalized() for c in constraints if c]
    self_rels = []
    series = []
    for c in constraints:
        s = self_relation_degree(c, fld)
        if s is not None:
            self_rels.append((c.terms[0].symbol, s))
        else:
            solved = _series(c, fld, truncation)
            if solved is not None:
                series.append(solved)
    solved_form = SolvedForm(
        field=fld,
        q=q,
        symbols=tuple(order),
        dependents=tuple(sorted(dependents, key=lambda d: order.index(d[0]))),
        constraints=tuple(constraints),
        self_relations=tuple(self_rels),
        series=tuple(series),
        truncated=truncated,
        truncation=truncation,
    )
    logger.debug(
        f"Eliminated {len(dependents)} of {len(order)} symbols, "
        f"{len(constraints)} constraints, truncated={solved_form.truncated}"
    )
    return solved_form
