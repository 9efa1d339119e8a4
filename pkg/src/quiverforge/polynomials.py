"""
Noncommutative polynomials for identity checks.

Grammar: variables ``x1..xn``, ``+``, ``-``, integer or braced field-element
coefficients (``{GF(4){0,1}}``), juxtaposition or ``*`` for products,
commutators ``[a,b]``, powers ``^k`` and Frobenius powers ``^{q^u}`` on
variables, parentheses.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Mapping
from dataclasses import dataclass

from quiverforge.basering import FieldSpec, Ring, parse_scalar
from quiverforge.exceptions import PolynomialSyntaxError
from quiverforge.linalg import Matrix

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"\s*(?:(?P<var>x\d+)|(?P<int>\d+)|(?P<brace>\{[^{}]*(?:\{[^{}]*\}[^{}]*)*\})|(?P<op>[-+*^()\[\],]))"
)
_FROB = re.compile(r"\{q\^(\d+)\}")


class Poly:
    """Base of the polynomial syntax tree."""

    @property
    def degree(self) -> int:
        raise NotImplementedError

    def variables(self) -> set[int]:
        raise NotImplementedError


@dataclass(frozen=True)
class Var(Poly):
    index: int

    @property
    def degree(self) -> int:
        return 1

    def variables(self) -> set[int]:
        return {self.index}

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Const(Poly):
    """A scalar; ``text`` is the coefficient as written."""

    text: str

    @property
    def degree(self) -> int:
        return 0

    def variables(self) -> set[int]:
        return set()

    def __str__(self) -> str:
        return self.text if self.text.isdigit() else f"{{{self.text}}}"


@dataclass(frozen=True)
class Add(Poly):
    terms: tuple[tuple[int, Poly], ...]

    @property
    def degree(self) -> int:
        return max(p.degree for _, p in self.terms)

    def variables(self) -> set[int]:
        return set().union(*(p.variables() for _, p in self.terms))

    def __str__(self) -> str:
        parts = []
        for k, (sign, p) in enumerate(self.terms):
            op = "-" if sign < 0 else ("+" if k else "")
            parts.append(f"{op} {p}".strip() if k else f"{op}{p}")
        return " ".join(parts)


@dataclass(frozen=True)
class Mul(Poly):
    factors: tuple[Poly, ...]

    @property
    def degree(self) -> int:
        return sum(p.degree for p in self.factors)

    def variables(self) -> set[int]:
        return set().union(*(p.variables() for p in self.factors))

    def __str__(self) -> str:
        return "".join(f"({p})" if isinstance(p, Add) else str(p) for p in self.factors)


@dataclass(frozen=True)
class Commutator(Poly):
    left: Poly
    right: Poly

    @property
    def degree(self) -> int:
        return self.left.degree + self.right.degree

    def variables(self) -> set[int]:
        return self.left.variables() | self.right.variables()

    def __str__(self) -> str:
        return f"[{self.left},{self.right}]"


@dataclass(frozen=True)
class Pow(Poly):
    """``base^exponent``; with ``frobenius`` set the exponent is q^exponent."""

    base: Poly
    exponent: int
    frobenius: bool = False

    @property
    def degree(self) -> int:
        return self.base.degree if self.frobenius else self.base.degree * self.exponent

    def variables(self) -> set[int]:
        return self.base.variables()

    def __str__(self) -> str:
        inner = f"({self.base})" if not isinstance(self.base, Var) else str(self.base)
        return f"{inner}^{{q^{self.exponent}}}" if self.frobenius else f"{inner}^{self.exponent}"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                raise PolynomialSyntaxError(
                    f"Unexpected character {text[pos:].strip()[0]!r} at {pos} in {text!r}",
                    "UNEXPECTED_CHARACTER",
                )
            kind = m.lastgroup or ""
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def error(self, message: str) -> PolynomialSyntaxError:
        where = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        return PolynomialSyntaxError(f"{message} at {where} in {self.text!r}", "INVALID_POLYNOMIAL")

    def peek(self) -> tuple[str, str] | None:
        if self.i < len(self.tokens):
            kind, value, _ = self.tokens[self.i]
            return kind, value
        return None

    def take(self, value: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            raise self.error(f"Expected {value or 'a token'}")
        self.i += 1
        return tok

    def parse(self) -> Poly:
        if not self.tokens:
            raise PolynomialSyntaxError("Empty polynomial", "EMPTY_POLYNOMIAL")
        out = self.expr()
        if self.peek() is not None:
            raise self.error("Trailing input")
        return out

    def expr(self) -> Poly:
        terms: list[tuple[int, Poly]] = []
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        terms.append((sign, self.term()))
        while self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Add(tuple(terms))

    def term(self) -> Poly:
        factors = [self.factor()]
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                factors.append(self.factor())
            elif tok is not None and (tok[0] in ("var", "int", "brace") or tok[1] in ("(", "[")):
                factors.append(self.factor())
            else:
                break
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def factor(self) -> Poly:
        base = self.atom()
        while self.peek() == ("op", "^"):
            self.take()
            kind, value = self.take()
            if kind == "int":
                if int(value) < 1:
                    raise self.error("Exponents must be positive")
                base = Pow(base, int(value))
            elif kind == "brace" and (frob := _FROB.fullmatch(value)):
                if not isinstance(base, Var):
                    raise self.error("Frobenius powers apply to variables only")
                base = Pow(base, int(frob.group(1)), frobenius=True)
            else:
                raise self.error(f"Bad exponent {value!r}")
        return base

    def atom(self) -> Poly:
        kind, value = self.take()
        if kind == "var":
            return Var(int(value[1:]))
        if kind == "int":
            return Const(value)
        if kind == "brace":
            return Const(value[1:-1].strip())
        if value == "(":
            inner = self.expr()
            self.take(")")
            return inner
        if value == "[":
            left = self.expr()
            self.take(",")
            right = self.expr()
            self.take("]")
            return Commutator(left, right)
        raise self.error(f"Unexpected {value!r}")


def parse_polynomial(text: str) -> Poly:
    """
    Parse a noncommutative polynomial.

    Raises:
        PolynomialSyntaxError: With the position of the first bad token.
    """
    poly = _Parser(text).parse()
    logger.debug(f"Parsed polynomial {poly} of degree {poly.degree}")
    return poly


def evaluate(
    poly: Poly,
    values: Mapping[int, Matrix],
    fld: FieldSpec,
    ring: Ring,
    size: int,
    q: int | None = None,
) -> Matrix:
    """
    Substitute matrices for the variables.

    Constants act as scalar multiples of the identity; ``q`` is the order
    of the base field for Frobenius powers.

    Raises:
        PolynomialSyntaxError: If a variable has no value.
    """

    def go(p: Poly) -> Matrix:
        if isinstance(p, Var):
            if p.index not in values:
                raise PolynomialSyntaxError(f"No value for x{p.index}", "UNBOUND_VARIABLE")
            return values[p.index]
        if isinstance(p, Const):
            return Matrix.identity(size, ring) * parse_scalar(p.text, fld)
        if isinstance(p, Add):
            total = Matrix.zero(size, ring)
            for sign, term in p.terms:
                total = total + go(term) if sign > 0 else total - go(term)
            return total
        if isinstance(p, Mul):
            result = go(p.factors[0])
            for f in p.factors[1:]:
                if isinstance(f, Const):
                    result = result * parse_scalar(f.text, fld)
                else:
                    result = result.matmul(go(f))
            return result
        if isinstance(p, Commutator):
            return go(p.left).commutator(go(p.right))
        if isinstance(p, Pow):
            e = (q or fld.order) ** p.exponent if p.frobenius else p.exponent
            return go(p.base) ** e
        raise PolynomialSyntaxError(f"Cannot evaluate {p!r}", "INVALID_POLYNOMIAL")

    return go(poly)
