"""
Matrices over base rings and exact linear algebra over their scalar fields.

Ring-valued matrices are sparse and immutable. To do linear algebra, each
entry is split into its monomial coordinates over the scalar field, so a
matrix becomes a vector indexed by (row, column, monomial); the coordinate
index grows as new monomials appear. Row reduction and null spaces are
delegated to galois.
"""

from __future__ import annotations

import functools
import logging
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass

import galois
import numpy as np

from quiverforge.basering import (
    FieldSpec,
    Monomial,
    Ring,
    RingElement,
    embed_scalar,
    from_subfield_coordinates,
    frobenius,
    subfield_coordinates,
)
from quiverforge.exceptions import RingError

logger = logging.getLogger(__name__)

Position = tuple[int, int]


@dataclass(frozen=True)
class Matrix:
    """Sparse square matrix of RingElements; absent entries are zero."""

    size: int
    ring: Ring
    entries: tuple[tuple[Position, RingElement], ...] = ()

    @classmethod
    def build(cls, size: int, ring: Ring, data: Mapping[Position, RingElement]) -> Matrix:
        items = tuple(sorted((pos, val) for pos, val in data.items() if val))
        return cls(size, ring, items)

    @classmethod
    def zero(cls, size: int, ring: Ring) -> Matrix:
        return cls(size, ring, ())

    @classmethod
    def identity(cls, size: int, ring: Ring) -> Matrix:
        return cls(size, ring, tuple(((i, i), ring.one) for i in range(size)))

    @classmethod
    def unit(cls, size: int, ring: Ring, i: int, j: int) -> Matrix:
        return cls(size, ring, (((i, j), ring.one),))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RingElement | int]], ring: Ring) -> Matrix:
        data: dict[Position, RingElement] = {}
        for i, row in enumerate(rows):
            for j, val in enumerate(row):
                elem = val if isinstance(val, RingElement) else ring.constant(val)
                if elem:
                    data[(i, j)] = elem
        return cls.build(len(rows), ring, data)

    @functools.cached_property
    def _data(self) -> dict[Position, RingElement]:
        return dict(self.entries)

    @functools.cached_property
    def _rows(self) -> dict[int, list[tuple[int, RingElement]]]:
        rows: dict[int, list[tuple[int, RingElement]]] = {}
        for (i, j), val in self.entries:
            rows.setdefault(i, []).append((j, val))
        return rows

    def get(self, i: int, j: int) -> RingElement:
        return self._data.get((i, j), self.ring.zero)

    def __getitem__(self, pos: Position) -> RingElement:
        return self.get(*pos)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __iter__(self) -> Iterator[tuple[Position, RingElement]]:
        return iter(self.entries)

    def rows(self) -> list[list[RingElement]]:
        return [[self.get(i, j) for j in range(self.size)] for i in range(self.size)]

    def _check(self, other: Matrix) -> Ring:
        if self.size != other.size:
            raise RingError(
                f"Matrix size mismatch: {self.size} vs {other.size}", "MATRIX_SIZE_MISMATCH"
            )
        return self.ring.join(other.ring)

    def __add__(self, other: Matrix) -> Matrix:
        ring = self._check(other)
        data = dict(self._data)
        for pos, val in other.entries:
            data[pos] = data[pos] + val if pos in data else val
        return Matrix.build(self.size, ring, data)

    def __neg__(self) -> Matrix:
        return Matrix(self.size, self.ring, tuple((pos, -val) for pos, val in self.entries))

    def __sub__(self, other: Matrix) -> Matrix:
        return self + (-other)

    def __mul__(self, other: Matrix | RingElement | int) -> Matrix:
        if isinstance(other, Matrix):
            return self.matmul(other)
        if isinstance(other, int):
            return self.map(lambda x: x * other)
        return self.map(lambda x: x * other)

    def __rmul__(self, other: RingElement | int) -> Matrix:
        return self.map(lambda x: other * x)

    def matmul(self, other: Matrix) -> Matrix:
        ring = self._check(other)
        other_rows = other._rows
        data: dict[Position, RingElement] = {}
        for (i, k), a in self.entries:
            for j, b in other_rows.get(k, ()):
                prod = a * b
                if not prod:
                    continue
                data[(i, j)] = data[(i, j)] + prod if (i, j) in data else prod
        return Matrix.build(self.size, ring, data)

    def __pow__(self, e: int) -> Matrix:
        if e < 1:
            raise RingError(f"Matrix powers need e >= 1, got {e}", "INVALID_EXPONENT")
        result = self
        for _ in range(e - 1):
            result = result.matmul(self)
        return result

    def commutator(self, other: Matrix) -> Matrix:
        return self.matmul(other) - other.matmul(self)

    def map(self, fn: Callable[[RingElement], RingElement]) -> Matrix:
        data = {pos: fn(val) for pos, val in self.entries}
        ring = self.ring
        for val in data.values():
            ring = ring.join(val.ring)
        return Matrix.build(self.size, ring, data)

    def frobenius(self, u: int, q: int | None = None) -> Matrix:
        """Entrywise x ↦ x^{q^u}."""
        return self.map(lambda x: frobenius(x, u, q))

    def transpose(self) -> Matrix:
        return Matrix.build(self.size, self.ring, {(j, i): v for (i, j), v in self.entries})

    def restrict(self, keep: Callable[[int, int], bool]) -> Matrix:
        """Zero every entry whose position fails ``keep``."""
        return Matrix.build(self.size, self.ring, {p: v for p, v in self.entries if keep(*p)})

    def with_ring(self, ring: Ring) -> Matrix:
        return Matrix.build(self.size, ring, {p: v.with_ring(ring) for p, v in self.entries})

    def substitute(self, assignment: Mapping[str, RingElement], target: Ring) -> Matrix:
        return Matrix.build(
            self.size, target, {p: v.substitute(assignment, target) for p, v in self.entries}
        )

    def variables(self) -> set:
        return {var for _, val in self.entries for var in val.variables()}

    def text_rows(self, fmt: Callable[[RingElement], str]) -> list[list[str]]:
        """Dense row-major strings, as used by the matrix serialization."""
        return [[fmt(self.get(i, j)) for j in range(self.size)] for i in range(self.size)]


CoordinateKey = tuple[int, int, Monomial, int]


class Coordinates:
    """
    Growing index of (row, column, monomial, component) coordinates.

    Scalars of an extension of the span field are split into their
    components over it; otherwise the component is always 0.
    """

    def __init__(self) -> None:
        self.index: dict[CoordinateKey, int] = {}
        self.keys: list[CoordinateKey] = []

    def __len__(self) -> int:
        return len(self.keys)

    def column(self, key: CoordinateKey) -> int:
        col = self.index.get(key)
        if col is None:
            col = len(self.keys)
            self.index[key] = col
            self.keys.append(key)
        return col

    def vector(self, m: Matrix, fld: FieldSpec | None = None) -> dict[int, int]:
        """Sparse coordinate vector of a matrix over fld (its scalar field by default)."""
        own = m.ring.field
        fld = fld or own
        vec: dict[int, int] = {}
        for (i, j), val in m.entries:
            for mono, coeff in val.terms:
                for k, c in enumerate(subfield_coordinates(coeff, own, fld)):
                    if c:
                        vec[self.column((i, j, mono, k))] = c
        return vec

    def matrix(
        self, vec: Mapping[int, int], size: int, ring: Ring, fld: FieldSpec | None = None
    ) -> Matrix:
        """Inverse of ``vector``."""
        fld = fld or ring.field
        parts: dict[tuple[Position, Monomial], dict[int, int]] = {}
        for col, coeff in vec.items():
            if coeff:
                i, j, mono, k = self.keys[col]
                parts.setdefault(((i, j), mono), {})[k] = coeff
        data: dict[Position, dict[Monomial, int]] = {}
        for (pos, mono), comps in parts.items():
            ordered = [comps.get(k, 0) for k in range(max(comps) + 1)]
            data.setdefault(pos, {})[mono] = from_subfield_coordinates(ordered, ring.field, fld)
        return Matrix.build(size, ring, {p: ring.from_terms(t) for p, t in data.items()})


def dense(fld: FieldSpec, vectors: Sequence[Mapping[int, int]], width: int) -> galois.FieldArray:
    """Stack sparse vectors into a galois array of the given width."""
    arr = np.zeros((len(vectors), max(width, 1)), dtype=np.int64)
    for r, vec in enumerate(vectors):
        for c, v in vec.items():
            arr[r, c] = v
    return fld.gf(arr)


def _pivot_columns(reduced: galois.FieldArray) -> list[int]:
    nonzero = np.asarray(reduced) != 0
    return [int(np.argmax(row)) for row in nonzero if row.any()]


def independent_subset(
    fld: FieldSpec, vectors: Sequence[Mapping[int, int]], width: int
) -> list[int]:
    """Indices of a maximal independent subset, chosen greedily in order."""
    if not vectors:
        return []
    transposed = dense(fld, vectors, width).T
    return _pivot_columns(transposed.row_reduce())


def rank(fld: FieldSpec, vectors: Sequence[Mapping[int, int]], width: int) -> int:
    if not vectors:
        return 0
    return len(_pivot_columns(dense(fld, vectors, width).row_reduce()))


def null_space(fld: FieldSpec, rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of {x : A x = 0} for the matrix with the given rows."""
    if not rows:
        return []
    arr = fld.gf(np.array(rows, dtype=np.int64))
    basis = arr.null_space()
    return [[int(v) for v in row] for row in basis]


def solve_in_span(
    fld: FieldSpec,
    basis: Sequence[Mapping[int, int]],
    targets: Sequence[Mapping[int, int]],
    width: int,
) -> list[list[int]] | None:
    """
    Coefficients expressing each target in the (independent) basis.

    Returns:
        One coefficient list per target, or None if some target is not in the span.
    """
    r = len(basis)
    if not targets:
        return []
    if r == 0:
        return None if any(targets) else [[] for _ in targets]
    left = dense(fld, basis, width).T
    right = dense(fld, targets, width).T
    augmented = fld.gf(np.hstack([np.asarray(left), np.asarray(right)]))
    reduced = augmented.row_reduce(ncols=r)
    values = np.asarray(reduced)
    if values[r:, r:].any():
        return None
    return [[int(values[i, r + k]) for i in range(r)] for k in range(len(targets))]


class EchelonSpace:
    """
    Linear span of ring-valued matrices over fld, the ring's field or a subfield.

    The basis is kept as the original matrices (chosen greedily), so
    products and restrictions of basis elements stay meaningful.
    """

    def __init__(self, fld: FieldSpec, size: int, ring: Ring, coords: Coordinates | None = None):
        self.field = fld
        self.size = size
        self.ring = ring
        self.coords = coords or Coordinates()
        self.basis: list[Matrix] = []
        self.vectors: list[dict[int, int]] = []

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def extend(self, candidates: Iterable[Matrix]) -> list[Matrix]:
        """Add the candidates that enlarge the span; returns the ones added, in order."""
        cands = [m for m in candidates if m]
        if not cands:
            return []
        cand_vecs = [self.coords.vector(m, self.field) for m in cands]
        chosen = independent_subset(self.field, self.vectors + cand_vecs, len(self.coords))
        offset = len(self.vectors)
        added = []
        for idx in chosen:
            if idx >= offset:
                k = idx - offset
                self.basis.append(cands[k])
                self.vectors.append(cand_vecs[k])
                self.ring = self.ring.join(cands[k].ring)
                added.append(cands[k])
        return added

    def contains(self, m: Matrix) -> bool:
        if not m:
            return True
        vec = self.coords.vector(m, self.field)
        return rank(self.field, self.vectors + [vec], len(self.coords)) == len(self.vectors)

    def express(self, targets: Sequence[Matrix]) -> list[list[int]]:
        """
        Coordinates of each target in the basis.

        Raises:
            RingError: If a target lies outside the span.
        """
        vecs = [self.coords.vector(m, self.field) for m in targets]
        coeffs = solve_in_span(self.field, self.vectors, vecs, len(self.coords))
        if coeffs is None:
            raise RingError("Matrix is not in the span of the basis", "NOT_IN_SPAN")
        return coeffs

    def combination(self, coeffs: Sequence[int]) -> Matrix:
        total = Matrix.zero(self.size, self.ring)
        for c, b in zip(coeffs, self.basis, strict=True):
            if c:
                s = embed_scalar(c, self.field, self.ring.field)
                total = total + b.map(lambda x, s=s: x.scale(s))
        return total
