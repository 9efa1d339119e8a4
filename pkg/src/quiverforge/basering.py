"""
Exact arithmetic in the base rings used for materialization.

Every ring is a finite field GF(p^t) with finitely many named generators
adjoined, modulo reduction rules carried by the generators themselves:

* free generators (the symbolic K-proxy and generic coordinates),
* finite generators with x^Q = x (finite-field symbols, Boolean-Frobenius ψ),
* nilpotent generators grouped under a total-degree truncation (θ, ε).

Scalars are stored as integers in galois' integer representation, so a
polynomial in any of these rings is a sparse map monomial -> int.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import logging
import math
import random
import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

import galois
import numpy as np

from quiverforge.exceptions import BoundExceededError, PolynomialSyntaxError, RingError

logger = logging.getLogger(__name__)

FREE = "free"
FINITE = "finite"
NILPOTENT = "nilpotent"

DEFAULT_FIELD_BOUND = 2**20
DEFAULT_BASIS_BOUND = 10**6

# Extension fields up to this order get full lookup tables.
_TABLE_ORDER = 256


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^t) with a fixed defining polynomial (coefficients low degree first)."""

    p: int
    t: int
    modulus: tuple[int, ...]

    @property
    def order(self) -> int:
        return self.p**self.t

    @property
    def gf(self) -> type[galois.FieldArray]:
        """The galois field class realizing this field."""
        return _galois_class(self)

    def __str__(self) -> str:
        return f"GF({self.p}^{self.t})"

    def coerce(self, value: int) -> int:
        """Map an integer into the prime subfield."""
        return value % self.p

    def add(self, a: int, b: int) -> int:
        if self.t == 1:
            return (a + b) % self.p
        tables = _tables(self)
        if tables is not None:
            return tables[0][a][b]
        return int(self.gf(a) + self.gf(b))

    def neg(self, a: int) -> int:
        if self.t == 1:
            return (-a) % self.p
        return int(-self.gf(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.t == 1:
            return (a * b) % self.p
        tables = _tables(self)
        if tables is not None:
            return tables[1][a][b]
        return int(self.gf(a) * self.gf(b))

    def inv(self, a: int) -> int:
        if a == 0:
            raise RingError(f"Division by zero in {self}", "DIVISION_BY_ZERO")
        if self.t == 1:
            return pow(a, -1, self.p)
        return int(self.gf(a) ** -1)

    def power(self, a: int, e: int) -> int:
        if e < 0:
            return self.power(self.inv(a), -e)
        if self.t == 1:
            return pow(a, e, self.p)
        if a in (0, 1):
            return a if e else 1
        # the multiplicative group has order q - 1
        return int(self.gf(a) ** (e % (self.order - 1)))

    def frob(self, a: int, u: int, base_degree: int = 1) -> int:
        """a^{(p^base_degree)^u}, with u reduced modulo the relative degree."""
        rel = self.t // base_degree
        return self.power(a, self.p ** (base_degree * (u % rel)))

    def digits(self, a: int) -> list[int]:
        """Coefficients of a in the polynomial basis, low degree first."""
        return [(a // self.p**i) % self.p for i in range(self.t)]

    def from_digits(self, coeffs: Iterable[int]) -> int:
        return sum((c % self.p) * self.p**i for i, c in enumerate(coeffs))

    def elements(self) -> range:
        return range(self.order)

    def in_subfield(self, a: int, degree: int) -> bool:
        """Whether a lies in GF(p^degree), i.e. a^{p^degree} = a."""
        return self.power(a, self.p**degree) == a


@functools.lru_cache(maxsize=None)
def _galois_class(spec: FieldSpec) -> type[galois.FieldArray]:
    if spec.t == 1:
        return galois.GF(spec.p)
    prime_field = galois.GF(spec.p)
    poly = galois.Poly(list(reversed(spec.modulus)), field=prime_field)
    return galois.GF(spec.p**spec.t, irreducible_poly=poly)


@functools.lru_cache(maxsize=None)
def _tables(spec: FieldSpec) -> tuple[list[list[int]], list[list[int]]] | None:
    if spec.order > _TABLE_ORDER:
        return None
    gf = _galois_class(spec)
    elems = gf(np.arange(spec.order))
    add = (elems[:, None] + elems[None, :]).tolist()
    mul = (elems[:, None] * elems[None, :]).tolist()
    return add, mul


@functools.lru_cache(maxsize=None)
def _embedding_root(source: FieldSpec, target: FieldSpec) -> int:
    """A root of source.modulus inside target, fixing an embedding source -> target."""
    if source.p != target.p or target.t % source.t:
        raise RingError(f"{source} does not embed into {target}", "NO_EMBEDDING")
    poly = galois.Poly(list(reversed(source.modulus)), field=target.gf)
    roots = sorted(int(r) for r in poly.roots())
    if not roots:
        raise RingError(f"{source} does not embed into {target}", "NO_EMBEDDING")
    return roots[0]


def embed_scalar(a: int, source: FieldSpec, target: FieldSpec) -> int:
    """Image of a scalar of source under the canonical embedding into target."""
    if source == target or source.t == 1:
        return a if source == target else target.coerce(a)
    root = _embedding_root(source, target)
    value = 0
    for i, c in enumerate(source.digits(a)):
        if c:
            value = target.add(value, target.mul(target.coerce(c), target.power(root, i)))
    return value


@functools.lru_cache(maxsize=None)
def _subfield_table(fld: FieldSpec, sub: FieldSpec) -> dict[int, tuple[int, ...]]:
    d = fld.t // sub.t
    alpha = [fld.power(fld.p, k) for k in range(d)]
    table = {}
    for coeffs in itertools.product(range(sub.order), repeat=d):
        value = 0
        for c, a in zip(coeffs, alpha, strict=True):
            if c:
                value = fld.add(value, fld.mul(embed_scalar(c, sub, fld), a))
        table[value] = coeffs
    return table


def subfield_coordinates(a: int, fld: FieldSpec, sub: FieldSpec) -> tuple[int, ...]:
    """
    Coordinates of a scalar of fld over the subfield sub.

    The basis is 1, α, …, α^{d-1} with α the root of fld's modulus and
    d = [fld : sub].

    Raises:
        RingError: If sub is not a subfield of fld.
    """
    if fld == sub:
        return (a,)
    if sub.p != fld.p or fld.t % sub.t:
        raise RingError(f"{sub} is not a subfield of {fld}", "NO_EMBEDDING")
    if sub.t == 1:
        return tuple(fld.digits(a))
    return _subfield_table(fld, sub)[a]


def from_subfield_coordinates(coeffs: Iterable[int], fld: FieldSpec, sub: FieldSpec) -> int:
    """Inverse of ``subfield_coordinates``."""
    if fld == sub:
        return next(iter(coeffs), 0)
    value = 0
    for k, c in enumerate(coeffs):
        if c:
            term = fld.mul(embed_scalar(c, sub, fld), fld.power(fld.p, k))
            value = fld.add(value, term)
    return value


def make_field(p: int, t: int, bound: int = DEFAULT_FIELD_BOUND) -> FieldSpec:
    """
    Build GF(p^t) with the lexicographically least monic irreducible modulus.

    Raises:
        RingError: If p is not prime or t < 1.
        BoundExceededError: If p^t exceeds the configured bound.
    """
    if not isinstance(p, int) or p < 2 or not galois.is_prime(p):
        logger.error(f"Field characteristic must be prime, got: {p}")
        raise RingError(f"Field characteristic must be prime, got: {p}", "NONPRIME_CHARACTERISTIC")
    if not isinstance(t, int) or t < 1:
        logger.error(f"Field degree must be a positive integer, got: {t}")
        raise RingError(
            f"Field degree must be a positive integer, got: {t}", "INVALID_FIELD_DEGREE"
        )
    if p**t > bound:
        logger.error(f"Field GF({p}^{t}) exceeds the size bound {bound}")
        raise BoundExceededError(
            f"Field GF({p}^{t}) exceeds the size bound {bound}", "FIELD_TOO_LARGE"
        )
    if t == 1:
        modulus: tuple[int, ...] = (0, 1)
    else:
        poly = galois.irreducible_poly(p, t, method="min")
        modulus = tuple(int(c) for c in reversed(poly.coeffs))
    spec = FieldSpec(p, t, modulus)
    logger.debug(f"Constructed {spec} with modulus {modulus}")
    return spec


@dataclass(frozen=True, order=True)
class Indeterminate:
    """
    A named generator with its reduction rule.

    ``order`` is Q for finite generators (x^Q = x) and the truncation order
    of the generator's group for nilpotent ones. ``generic`` marks generic
    coordinates, which coefficient extraction splits off.
    """

    name: str
    kind: str = FREE
    order: int = 0
    group: str = ""
    generic: bool = False

    def __str__(self) -> str:
        return self.name


Monomial = tuple[tuple[Indeterminate, int], ...]
ONE: Monomial = ()


def _reduce_exponent(var: Indeterminate, e: int) -> int:
    if var.kind == FINITE and e >= var.order:
        return (e - 1) % (var.order - 1) + 1
    return e


def _divides(small: Monomial, big: Monomial) -> bool:
    exps = dict(big)
    return all(exps.get(v, 0) >= e for v, e in small)


def normalize_monomial(
    exps: Mapping[Indeterminate, int], annihilators: Iterable[Monomial] = ()
) -> Monomial | None:
    """Reduce exponents and apply truncation; None when the monomial vanishes."""
    out = []
    group_degree: dict[str, int] = {}
    for var in sorted(exps):
        e = _reduce_exponent(var, exps[var])
        if e == 0:
            continue
        if var.kind == NILPOTENT:
            key = var.group or var.name
            group_degree[key] = group_degree.get(key, 0) + e
            if group_degree[key] >= var.order:
                return None
        out.append((var, e))
    mono = tuple(out)
    for ann in annihilators:
        if _divides(ann, mono):
            return None
    return mono


def monomial_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def monomial_text(mono: Monomial) -> str:
    if not mono:
        return "1"
    return "*".join(v.name if e == 1 else f"{v.name}^{e}" for v, e in mono)


def _monomial_key(mono: Monomial) -> tuple[int, tuple[tuple[str, int], ...]]:
    return monomial_degree(mono), tuple((v.name, -e) for v, e in mono)


@dataclass(frozen=True)
class Ring:
    """A base ring: a finite field with named generators and monomial annihilators."""

    field: FieldSpec
    gens: tuple[Indeterminate, ...] = ()
    annihilators: tuple[Monomial, ...] = ()
    tag: str = dataclasses.field(default="", compare=False)

    def __str__(self) -> str:
        if self.tag:
            return self.tag
        if not self.gens:
            return str(self.field)
        return f"{self.field}[{','.join(g.name for g in self.gens)}]"

    @property
    def zero(self) -> RingElement:
        return RingElement(self, ())

    @property
    def one(self) -> RingElement:
        return RingElement(self, ((ONE, 1),))

    def constant(self, value: int) -> RingElement:
        return self.scalar(self.field.coerce(value))

    def scalar(self, value: int) -> RingElement:
        """Element for a scalar already in integer representation."""
        if value == 0:
            return self.zero
        return RingElement(self, ((ONE, value),))

    def var(self, ind: Indeterminate) -> RingElement:
        mono = normalize_monomial({ind: 1}, self.annihilators)
        if mono is None:
            return self.zero
        return RingElement(self, ((mono, 1),))

    def gen(self, name: str) -> RingElement:
        for g in self.gens:
            if g.name == name:
                return self.var(g)
        raise RingError(f"{self} has no generator named {name}", "UNKNOWN_GENERATOR")

    def from_terms(self, terms: Mapping[Monomial, int]) -> RingElement:
        """Canonical element from raw (possibly unreduced) terms."""
        acc: dict[Monomial, int] = {}
        fld = self.field
        for mono, coeff in terms.items():
            if coeff == 0:
                continue
            norm = normalize_monomial(dict(mono), self.annihilators)
            if norm is None:
                continue
            acc[norm] = fld.add(acc.get(norm, 0), coeff)
        return _canonical(self, acc)

    def contains(self, other: Ring) -> bool:
        return (
            self.field == other.field
            and set(other.gens) <= set(self.gens)
            and set(other.annihilators) <= set(self.annihilators)
        )

    def join(self, other: Ring) -> Ring:
        """The larger of two compatible rings."""
        if self is other or self == other or self.contains(other):
            return self
        if other.contains(self):
            return other
        raise RingError(f"Ring mismatch: {self} vs {other}", "RING_MISMATCH")

    def adjoin(self, *gens: Indeterminate, tag: str = "") -> Ring:
        merged = tuple(sorted(set(self.gens) | set(gens)))
        return Ring(self.field, merged, self.annihilators, tag=tag)

    def merge(self, other: Ring, tag: str = "") -> Ring:
        """Tensor two rings over the same field (union of generators and relations)."""
        if self.field != other.field:
            raise RingError(f"Ring mismatch: {self} vs {other}", "RING_MISMATCH")
        gens = tuple(sorted(set(self.gens) | set(other.gens)))
        anns = tuple(sorted(set(self.annihilators) | set(other.annihilators)))
        return Ring(self.field, gens, anns, tag=tag)

    @property
    def is_field(self) -> bool:
        return not self.gens

    @property
    def has_nilpotents(self) -> bool:
        return any(g.kind == NILPOTENT for g in self.gens)

    def monomial_basis(self, bound: int = DEFAULT_BASIS_BOUND) -> tuple[Monomial, ...]:
        """
        Monomial basis over the field, in graded-lex order.

        Raises:
            RingError: If a free generator makes the ring infinite dimensional.
            BoundExceededError: If the basis exceeds the bound.
        """
        if any(g.kind == FREE for g in self.gens):
            raise RingError(f"{self} is not finite dimensional", "INFINITE_DIMENSIONAL")
        if self.dimension_estimate() > bound:
            raise BoundExceededError(f"Basis of {self} exceeds bound {bound}", "BASIS_TOO_LARGE")
        ranges = [range(g.order) for g in self.gens]
        monos = []
        for exps in itertools.product(*ranges):
            mono = normalize_monomial(dict(zip(self.gens, exps, strict=True)), self.annihilators)
            if mono is not None and monomial_degree(mono) == sum(exps):
                monos.append(mono)
                if len(monos) > bound:
                    raise BoundExceededError(
                        f"Basis of {self} exceeds bound {bound}", "BASIS_TOO_LARGE"
                    )
        return tuple(sorted(set(monos), key=_monomial_key))

    def dimension_estimate(self) -> int:
        """Dimension over the field computed from group truncations, without enumeration."""
        total = 1
        groups: dict[str, list[Indeterminate]] = {}
        for g in self.gens:
            if g.kind == NILPOTENT:
                groups.setdefault(g.group or g.name, []).append(g)
            elif g.kind == FINITE:
                total *= g.order
        for members in groups.values():
            total *= math.comb(len(members) + members[0].order - 1, len(members))
        return total


@dataclass(frozen=True)
class RingElement:
    """Immutable element of a Ring, stored as sorted (monomial, coefficient) terms."""

    ring: Ring
    terms: tuple[tuple[Monomial, int], ...] = ()

    def _lift(self, other: RingElement | int) -> tuple[Ring, RingElement]:
        if isinstance(other, RingElement):
            return self.ring.join(other.ring), other
        if isinstance(other, int):
            return self.ring, self.ring.constant(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: RingElement | int) -> RingElement:
        if not isinstance(other, RingElement | int):
            return NotImplemented
        ring, rhs = self._lift(other)
        fld = ring.field
        acc = dict(self.terms)
        for mono, coeff in rhs.terms:
            acc[mono] = fld.add(acc.get(mono, 0), coeff)
        return _canonical(ring, acc)

    __radd__ = __add__

    def __neg__(self) -> RingElement:
        fld = self.ring.field
        return RingElement(self.ring, tuple((m, fld.neg(c)) for m, c in self.terms))

    def __sub__(self, other: RingElement | int) -> RingElement:
        if not isinstance(other, RingElement | int):
            return NotImplemented
        _, rhs = self._lift(other)
        return self + (-rhs)

    def __rsub__(self, other: int) -> RingElement:
        return (-self) + other

    def __mul__(self, other: RingElement | int) -> RingElement:
        if not isinstance(other, RingElement | int):
            return NotImplemented
        ring, rhs = self._lift(other)
        if not self.terms or not rhs.terms:
            return ring.zero
        fld = ring.field
        anns = ring.annihilators
        acc: dict[Monomial, int] = {}
        for m1, c1 in self.terms:
            for m2, c2 in rhs.terms:
                if not m1:
                    mono: Monomial | None = m2
                elif not m2:
                    mono = m1
                else:
                    exps = dict(m1)
                    for v, e in m2:
                        exps[v] = exps.get(v, 0) + e
                    mono = normalize_monomial(exps, anns)
                if mono is None:
                    continue
                acc[mono] = fld.add(acc.get(mono, 0), fld.mul(c1, c2))
        return _canonical(ring, acc)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> RingElement:
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ring.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"RingElement({to_text(self)!r} in {self.ring})"

    @property
    def is_scalar(self) -> bool:
        return all(not m for m, _ in self.terms)

    @property
    def scalar(self) -> int:
        """The scalar value of a constant element."""
        if not self.is_scalar:
            raise RingError(f"{self} is not a scalar", "NOT_A_SCALAR")
        return self.terms[0][1] if self.terms else 0

    @property
    def constant_term(self) -> int:
        for mono, coeff in self.terms:
            if not mono:
                return coeff
        return 0

    def variables(self) -> set[Indeterminate]:
        return {v for mono, _ in self.terms for v, _ in mono}

    def coefficient(self, mono: Monomial) -> int:
        for m, c in self.terms:
            if m == mono:
                return c
        return 0

    def scale(self, c: int) -> RingElement:
        """Multiply by a scalar in integer representation."""
        if c == 0:
            return self.ring.zero
        fld = self.ring.field
        return RingElement(self.ring, tuple((m, fld.mul(x, c)) for m, x in self.terms))

    def with_ring(self, ring: Ring) -> RingElement:
        """The same polynomial read in a compatible larger ring."""
        ring.join(self.ring)
        return ring.from_terms(dict(self.terms))

    def inverse(self) -> RingElement:
        """
        Inverse of a unit: a nonzero scalar plus a nilpotent part.

        Raises:
            RingError: If the element is not a unit of this shape.
        """
        fld = self.ring.field
        c = self.constant_term
        if c == 0:
            raise RingError(f"{self} is not invertible", "NOT_INVERTIBLE")
        rest = self - self.ring.scalar(c)
        if not rest:
            return self.ring.scalar(fld.inv(c))
        if any(v.kind != NILPOTENT for v in rest.variables()):
            raise RingError(f"{self} is not invertible", "NOT_INVERTIBLE")
        c_inv = fld.inv(c)
        step = -(rest.scale(c_inv))
        total = self.ring.one
        term = self.ring.one
        while True:
            term = term * step
            if not term:
                break
            total = total + term
        return total.scale(c_inv)

    def split(self, generic: bool = True) -> dict[Monomial, RingElement]:
        """
        Split off the generic part of each monomial.

        Returns:
            Map generic monomial -> coefficient element in the remaining generators.
        """
        parts: dict[Monomial, dict[Monomial, int]] = {}
        for mono, coeff in self.terms:
            gen_part = tuple((v, e) for v, e in mono if v.generic == generic)
            rest = tuple((v, e) for v, e in mono if v.generic != generic)
            parts.setdefault(gen_part, {})[rest] = coeff
        return {k: _canonical(self.ring, v) for k, v in parts.items()}

    def substitute(
        self, assignment: Mapping[str, RingElement], target: Ring | None = None
    ) -> RingElement:
        """
        Evaluate by replacing named generators; unassigned generators stay symbolic.

        Scalars are carried into the target field along the canonical embedding.
        """
        target = target or self.ring
        src = self.ring.field
        dst = target.field
        result = target.zero
        for mono, coeff in self.terms:
            value = target.scalar(embed_scalar(coeff, src, dst))
            for var, e in mono:
                if var.name in assignment:
                    value = value * (assignment[var.name] ** e)
                else:
                    value = value * (target.var(var) ** e)
            result = result + value
        return result


def _canonical(ring: Ring, acc: Mapping[Monomial, int]) -> RingElement:
    items = sorted(((m, c) for m, c in acc.items() if c), key=lambda mc: _monomial_key(mc[0]))
    return RingElement(ring, tuple(items))


def ring_arith(a: RingElement, op: str, b: RingElement | int | None = None) -> RingElement:
    """
    Dispatch an arithmetic operation by name: add, sub, mul, pow or neg.

    Raises:
        RingError: On an unknown operation or a ring mismatch.
    """
    if op == "neg":
        return -a
    if b is None:
        raise RingError(f"Operation {op} needs a second operand", "MISSING_OPERAND")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        if not isinstance(b, int):
            raise RingError("Exponent must be an integer", "INVALID_EXPONENT")
        return a**b
    raise RingError(f"Unknown ring operation: {op}", "UNKNOWN_OPERATION")


def _base_degree(fld: FieldSpec, q: int) -> int:
    s = round(math.log(q, fld.p))
    if fld.p**s != q or fld.t % s:
        raise RingError(f"{q} is not the order of a subfield of {fld}", "INVALID_SUBFIELD")
    return s


def frobenius(x: RingElement, u: int, q: int | None = None) -> RingElement:
    """
    x^{q^u}, with q the order of the fixed subfield (the prime field by default).

    On polynomials the map raises each coefficient and multiplies every exponent
    by q^u before reduction.

    Raises:
        RingError: If x involves nilpotent generators.
    """
    if any(v.kind == NILPOTENT for v in x.variables()):
        logger.error(f"Frobenius applied to {x}, which involves nilpotents")
        raise RingError(
            f"Frobenius is only applied to field scalars and symbols, got {x}",
            "NILPOTENT_FROBENIUS",
        )
    fld = x.ring.field
    q = q or fld.p
    s = _base_degree(fld, q)
    if u < 0:
        raise RingError(f"Frobenius exponent must be non-negative, got {u}", "INVALID_EXPONENT")
    if u == 0 or not x.terms:
        return x
    if x.is_scalar:
        return x.ring.scalar(fld.frob(x.scalar, u, s))
    power = q**u
    acc: dict[Monomial, int] = {}
    for mono, coeff in x.terms:
        exps = {v: e * power for v, e in mono}
        norm = normalize_monomial(exps, x.ring.annihilators)
        if norm is None:
            continue
        acc[norm] = fld.add(acc.get(norm, 0), fld.frob(coeff, u, s))
    return _canonical(x.ring, acc)


def qth_root(x: RingElement, q: int | None = None) -> RingElement:
    """Inverse Frobenius on scalars: x ↦ x^{q^{t'-1}} with t' the degree over GF(q)."""
    if not x.is_scalar:
        raise RingError(f"q-th roots are only taken of scalars, got {x}", "NOT_A_SCALAR")
    fld = x.ring.field
    q = q or fld.p
    rel = fld.t // _base_degree(fld, q)
    return frobenius(x, rel - 1, q)


def make_trunc_ring(
    k: int,
    ell: int,
    field: FieldSpec,
    prefix: str = "theta",
    bound: int = DEFAULT_BASIS_BOUND,
) -> Ring:
    """
    F[θ1..θk]/⟨θ⟩^ℓ; monomials of total degree < ℓ survive.

    Raises:
        RingError: If k < 1 or ℓ < 1.
        BoundExceededError: If C(k+ℓ-1, k) exceeds the basis bound.
    """
    if k < 1 or ell < 1:
        raise RingError(f"Truncated ring needs k, l >= 1, got ({k}, {ell})", "INVALID_TRUNCATION")
    size = math.comb(k + ell - 1, k)
    if size > bound:
        logger.error(f"Trunc({k},{ell}) has {size} basis monomials, bound is {bound}")
        raise BoundExceededError(
            f"Trunc({k},{ell}) has {size} basis monomials, bound is {bound}", "BASIS_TOO_LARGE"
        )
    gens = tuple(
        Indeterminate(f"{prefix}{i}", NILPOTENT, order=ell, group=prefix) for i in range(1, k + 1)
    )
    return Ring(field, gens, tag=f"Trunc({k},{ell})")


def make_eps_ring(ell: int, field: FieldSpec, name: str = "eps") -> Ring:
    """F[ε]/⟨ε^ℓ⟩."""
    if ell < 1:
        raise RingError(f"Eps ring needs l >= 1, got {ell}", "INVALID_TRUNCATION")
    gen = Indeterminate(name, NILPOTENT, order=ell, group=name)
    return Ring(field, (gen,), tag=f"Eps({ell})")


def make_boolfrob_ring(q: int, m: int, field: FieldSpec, prefix: str = "psi") -> Ring:
    """F[ψ1..ψm]/⟨ψ_i^q − ψ_i⟩."""
    if m < 1:
        raise RingError(f"BoolFrob needs m >= 1, got {m}", "INVALID_TRUNCATION")
    gens = tuple(Indeterminate(f"{prefix}{i}", FINITE, order=q) for i in range(1, m + 1))
    return Ring(field, gens, tag=f"BoolFrob({q},{m})")


def trunc_basis(ring: Ring) -> tuple[Monomial, ...]:
    """Graded-lex monomial basis of a truncated ring (θ1^d first within degree d)."""
    return ring.monomial_basis()


@dataclass(frozen=True)
class KProxy:
    """
    Stand-in for the algebraically closed field K.

    Symbolic mode works with fresh free indeterminates over GF(prime) and is
    exact; BigPrime mode samples from GF(prime) and is probabilistic.
    """

    mode: str = "symbolic"
    prime: int = 32003
    counter: int = 0

    @property
    def field(self) -> FieldSpec:
        return make_field(self.prime, 1, bound=self.prime)

    @property
    def probabilistic(self) -> bool:
        return self.mode == "bigprime"

    def ring(self) -> Ring:
        return Ring(self.field, tag="KProxy")

    def fresh(self, prefix: str, count: int = 1) -> tuple[KProxy, tuple[Indeterminate, ...]]:
        """Allocate fresh free indeterminates; returns the advanced proxy."""
        inds = tuple(
            Indeterminate(f"{prefix}{self.counter + i}", FREE, generic=True) for i in range(count)
        )
        return dataclasses.replace(self, counter=self.counter + count), inds

    def sample(self, rng: random.Random) -> int:
        return rng.randrange(self.prime)


# Text forms

_GF_TEXT = re.compile(r"GF\((\d+)\^(\d+)\)\{([^}]*)\}")
_TRUNC_TEXT = re.compile(r"Trunc\((\d+),(\d+)\)\{([^}]*)\}")
_TOKEN = re.compile(
    r"\s*(?:(GF\(\d+\^\d+\)\{[^}]*\})|(Trunc\(\d+,\d+\)\{[^}]*\})|(\d+)|([A-Za-z_][A-Za-z_0-9.]*)|(.))"
)


def scalar_text(value: int, fld: FieldSpec) -> str:
    """GF(p^t){c0,c1,...}."""
    return f"GF({fld.p}^{fld.t}){{{','.join(str(c) for c in fld.digits(value))}}}"


def to_text(x: RingElement) -> str:
    """Canonical text: GF(p^t){...} for scalars, Trunc(k,l){...} for truncated rings."""
    ring = x.ring
    fld = ring.field
    if x.is_scalar:
        return scalar_text(x.scalar, fld)
    if ring.tag.startswith("Trunc(") and x.variables() <= set(ring.gens):
        body = ",".join(f"{monomial_text(m)}:{c}" for m, c in x.terms)
        return f"{ring.tag}{{{body}}}"
    return polynomial_text(x)


def polynomial_text(x: RingElement) -> str:
    """Human-readable polynomial; coefficients of extension fields use the GF form."""
    if not x.terms:
        return "0"
    fld = x.ring.field
    parts = []
    for mono, coeff in x.terms:
        if fld.t == 1:
            c = coeff if coeff <= fld.p // 2 or fld.p == 2 else coeff - fld.p
            ctext = str(c)
        else:
            ctext = scalar_text(coeff, fld)
        if not mono:
            parts.append(ctext)
        elif ctext == "1":
            parts.append(monomial_text(mono))
        elif ctext == "-1":
            parts.append(f"-{monomial_text(mono)}")
        else:
            parts.append(f"{ctext}*{monomial_text(mono)}")
    text = " + ".join(parts)
    return text.replace("+ -", "- ")


def document_text(x: RingElement) -> str:
    """Text for documents: prime-field scalars as plain integers, otherwise to_text."""
    if x.is_scalar and x.ring.field.t == 1:
        return str(x.scalar)
    return to_text(x)


class _ElementParser:
    """Recursive-descent reader for ring-element strings."""

    def __init__(self, text: str, ring: Ring, parameters: bool):
        self.text = text
        self.ring = ring
        self.parameters = parameters
        self.tokens = [m for m in _TOKEN.finditer(text) if m.group(0).strip()]
        self.pos = 0
        self.names = {g.name: g for g in ring.gens}

    def error(self, message: str) -> PolynomialSyntaxError:
        return PolynomialSyntaxError(f"{message} in {self.text!r}", "INVALID_RING_ELEMENT")

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].group(0).strip()
        return None

    def take(self) -> re.Match[str]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> RingElement:
        value = self.expr()
        if self.peek() is not None:
            raise self.error(f"Unexpected token {self.peek()!r}")
        return value

    def expr(self) -> RingElement:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take().group(0).strip()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RingElement:
        value = self.factor()
        while self.peek() == "*":
            self.take()
            value = value * self.factor()
        return value

    def factor(self) -> RingElement:
        if self.peek() == "-":
            self.take()
            return -self.factor()
        value = self.atom()
        if self.peek() == "^":
            self.take()
            tok = self.take()
            if not tok.group(3):
                raise self.error("Exponent must be an integer")
            value = value ** int(tok.group(3))
        return value

    def atom(self) -> RingElement:
        if self.peek() is None:
            raise self.error("Unexpected end of input")
        tok = self.take()
        if tok.group(1):
            return self.ring.scalar(parse_scalar(tok.group(1), self.ring.field))
        if tok.group(2):
            return _parse_trunc(tok.group(2), self.ring)
        if tok.group(3):
            return self.ring.constant(int(tok.group(3)))
        if tok.group(4):
            name = tok.group(4)
            if name in self.names:
                return self.ring.var(self.names[name])
            if not self.parameters:
                raise self.error(f"Unknown generator {name!r}")
            return self.ring.var(Indeterminate(name, FREE))
        if tok.group(5) == "(":
            value = self.expr()
            if self.peek() != ")":
                raise self.error("Missing closing parenthesis")
            self.take()
            return value
        raise self.error(f"Unexpected token {tok.group(0).strip()!r}")


def parse_scalar(text: str, fld: FieldSpec) -> int:
    """
    Read GF(p^t){c0,...} (or a plain integer) as a scalar of fld.

    Raises:
        PolynomialSyntaxError: On malformed text or a field mismatch.
    """
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return fld.coerce(int(text))
    match = _GF_TEXT.fullmatch(text)
    if not match:
        raise PolynomialSyntaxError(f"Not a field element: {text!r}", "INVALID_RING_ELEMENT")
    p, t = int(match.group(1)), int(match.group(2))
    coeffs = [int(c) for c in match.group(3).split(",") if c.strip()]
    if p != fld.p or t > fld.t or fld.t % t:
        raise PolynomialSyntaxError(
            f"{text!r} does not lie in {fld}", "INVALID_RING_ELEMENT"
        )
    if t == fld.t:
        return fld.from_digits(coeffs)
    source = make_field(p, t, bound=fld.order)
    return embed_scalar(source.from_digits(coeffs), source, fld)


def _parse_trunc(text: str, ring: Ring) -> RingElement:
    match = _TRUNC_TEXT.fullmatch(text)
    if not match:
        raise PolynomialSyntaxError(
            f"Not a truncated-ring element: {text!r}", "INVALID_RING_ELEMENT"
        )
    names = {g.name: g for g in ring.gens}
    value = ring.zero
    for item in match.group(3).split(","):
        if not item.strip():
            continue
        mono_text, _, coeff_text = item.rpartition(":")
        term = ring.constant(int(coeff_text))
        if mono_text.strip() != "1":
            for factor in mono_text.split("*"):
                name, _, exp = factor.strip().partition("^")
                if name not in names:
                    raise PolynomialSyntaxError(
                        f"Unknown generator {name!r} in {text!r}", "INVALID_RING_ELEMENT"
                    )
                term = term * ring.var(names[name]) ** (int(exp) if exp else 1)
        value = value + term
    return value


def parse_element(text: str, ring: Ring, parameters: bool = True) -> RingElement:
    """
    Parse a ring-element string.

    Accepts integers, GF(p^t){...}, Trunc(k,l){...} and polynomial
    expressions in the ring's generators; unknown identifiers become free
    parameters when ``parameters`` is set.

    Raises:
        PolynomialSyntaxError: On malformed input.
    """
    return _ElementParser(text, ring, parameters).parse()


def iter_field(fld: FieldSpec) -> Iterator[RingElement]:
    ring = Ring(fld)
    for a in fld.elements():
        yield ring.scalar(a)
