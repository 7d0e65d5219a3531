"""Dense exact matrices over a division ring.

Matrices are immutable. Row operations act on the left, column operations on
the right; there is deliberately no side-less ``scale``. Zero-dimensional
matrices are ordinary values and act as empty slots in :func:`block`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from . import kernels
from .errors import Infeasible, ParseError, ShapeMismatch, SingularMatrix
from .scalar import Element, RingDescriptor

__all__ = [
    "Matrix",
    "TrackedReduction",
    "IDENTITY",
    "block",
    "hstack",
    "vstack",
    "matmul",
    "add",
    "conjugate_transpose",
    "invert_matrix",
    "rank",
    "row_reduce_tracked",
    "left_null_space",
    "right_null_space",
    "row_basis",
    "solve_left",
    "solve_right",
]


class Matrix:
    __slots__ = ("ring", "rows", "cols", "_data", "_rank", "_hash")

    def __init__(self, ring: RingDescriptor, entries: Iterable[Iterable[Any]], cols: int | None = None) -> None:
        coerce = ring.coerce
        data = tuple(tuple(coerce(x) for x in row) for row in entries)
        if cols is None:
            if not data:
                raise ShapeMismatch("column count of an empty matrix must be given")
            cols = len(data[0])
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ShapeMismatch(f"row {i} has {len(row)} entries, expected {cols}")
        self._set(ring, data, len(data), cols)

    def _set(self, ring: RingDescriptor, data: tuple, rows: int, cols: int) -> None:
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self._data = data
        self._rank = None
        self._hash = None

    @classmethod
    def _raw(cls, ring: RingDescriptor, data: tuple, rows: int, cols: int) -> "Matrix":
        m = cls.__new__(cls)
        m._set(ring, data, rows, cols)
        return m

    @classmethod
    def zeros(cls, ring: RingDescriptor, rows: int, cols: int) -> "Matrix":
        z = ring.zero
        return cls._raw(ring, tuple((z,) * cols for _ in range(rows)), rows, cols)

    @classmethod
    def identity(cls, ring: RingDescriptor, n: int) -> "Matrix":
        z, o = ring.zero, ring.one
        return cls._raw(ring, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)), n, n)

    # -- access ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def data(self) -> tuple:
        """Row-major tuple of payload rows."""
        return self._data

    def __getitem__(self, ij: tuple[int, int]) -> Element:
        i, j = ij
        return Element(self.ring, self._data[i][j])

    def row(self, i: int) -> "Matrix":
        return Matrix._raw(self.ring, (self._data[i],), 1, self.cols)

    def col(self, j: int) -> "Matrix":
        return Matrix._raw(self.ring, tuple((r[j],) for r in self._data), self.rows, 1)

    def take_rows(self, idx: Sequence[int]) -> "Matrix":
        return Matrix._raw(self.ring, tuple(self._data[i] for i in idx), len(idx), self.cols)

    def take_cols(self, idx: Sequence[int]) -> "Matrix":
        return Matrix._raw(self.ring, tuple(tuple(r[j] for j in idx) for r in self._data), self.rows, len(idx))

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return Matrix._raw(self.ring, tuple(r[c0:c1] for r in self._data[r0:r1]), r1 - r0, c1 - c0)

    def is_zero(self) -> bool:
        isz = self.ring.is_zero
        return all(isz(x) for r in self._data for x in r)

    def is_hermitian(self) -> bool:
        return self == self.H

    # -- arithmetic ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.ring == other.ring and self.rows == other.rows
                and self.cols == other.cols and self._data == other._data)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, self.rows, self.cols, self._data))
        return self._hash

    def __add__(self, other: "Matrix") -> "Matrix":
        return add(self, other)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _same_shape(self, other, "subtract")
        sub = self.ring.sub
        return Matrix._raw(self.ring, tuple(tuple(map(sub, ra, rb)) for ra, rb in zip(self._data, other._data)),
                           self.rows, self.cols)

    def __neg__(self) -> "Matrix":
        neg = self.ring.neg
        return Matrix._raw(self.ring, tuple(tuple(map(neg, r)) for r in self._data), self.rows, self.cols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def scale_left(self, a: Any) -> "Matrix":
        """Return a * self (scalar multiplies every entry from the left)."""
        a = self.ring.coerce(a)
        mul = self.ring.mul
        return Matrix._raw(self.ring, tuple(tuple(mul(a, x) for x in r) for r in self._data), self.rows, self.cols)

    def scale_right(self, a: Any) -> "Matrix":
        """Return self * a."""
        a = self.ring.coerce(a)
        mul = self.ring.mul
        return Matrix._raw(self.ring, tuple(tuple(mul(x, a) for x in r) for r in self._data), self.rows, self.cols)

    @property
    def H(self) -> "Matrix":
        return conjugate_transpose(self)

    @property
    def T(self) -> "Matrix":
        return Matrix._raw(self.ring, tuple(zip(*self._data)) if self.rows else tuple(() for _ in range(self.cols)),
                           self.cols, self.rows)

    def rank(self) -> int:
        return rank(self)

    # -- text and JSON --------------------------------------------------------

    def __repr__(self) -> str:
        return f"Matrix({self.ring.label}, {self.rows}x{self.cols}, {self.to_text()})"

    def to_text(self) -> str:
        fmt = self.ring.format
        return "[" + "; ".join(" ".join(fmt(x) for x in r) for r in self._data) + "]"

    def to_json(self) -> dict:
        enc = self.ring.encode
        return {
            "ring": self.ring.kind.value,
            "p": self.ring.modulus,
            "rows": self.rows,
            "cols": self.cols,
            "data": [[enc(x) for x in r] for r in self._data],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: Any, where: str = "matrix") -> "Matrix":
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: expected a JSON object")
        ring = RingDescriptor.from_json(obj)
        rows, cols, data = obj.get("rows"), obj.get("cols"), obj.get("data")
        for name, v in (("rows", rows), ("cols", cols)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ParseError(f"{where}.{name}: nonnegative integer required, got {v!r}")
        if not isinstance(data, list) or len(data) != rows:
            raise ShapeMismatch(f"{where}.data: expected {rows} rows")
        out = []
        for i, r in enumerate(data):
            if not isinstance(r, list) or len(r) != cols:
                raise ShapeMismatch(f"{where}.data[{i}]: expected {cols} entries")
            try:
                out.append(tuple(ring.parse(x) for x in r))
            except ParseError as exc:
                raise ParseError(f"{where}.data[{i}]: {exc}") from exc
        return cls._raw(ring, tuple(out), rows, cols)

    @classmethod
    def loads(cls, text: str) -> "Matrix":
        return cls.from_json(json.loads(text))


def _same_shape(a: Matrix, b: Matrix, what: str) -> None:
    if a.ring != b.ring:
        raise ShapeMismatch(f"cannot {what} matrices over {a.ring.label} and {b.ring.label}")
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot {what} {a.rows}x{a.cols} and {b.rows}x{b.cols}")


def add(a: Matrix, b: Matrix) -> Matrix:
    _same_shape(a, b, "add")
    f = a.ring.add
    return Matrix._raw(a.ring, tuple(tuple(map(f, ra, rb)) for ra, rb in zip(a._data, b._data)), a.rows, a.cols)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.ring != b.ring:
        raise ShapeMismatch(f"cannot multiply matrices over {a.ring.label} and {b.ring.label}")
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    data = kernels.matmul_rows(a.ring, a._data, b._data, a.rows, a.cols, b.cols)
    return Matrix._raw(a.ring, data, a.rows, b.cols)


def conjugate_transpose(a: Matrix) -> Matrix:
    conj = a.ring.conj
    data = tuple(tuple(conj(a._data[i][j]) for i in range(a.rows)) for j in range(a.cols))
    return Matrix._raw(a.ring, data, a.cols, a.rows)


def rank(m: Matrix) -> int:
    if m._rank is None:
        m._rank = kernels.rank_rows(m.ring, m._data, m.cols)
    return m._rank


@dataclass(frozen=True)
class TrackedReduction:
    reduced: Matrix
    transform: Matrix
    pivot_columns: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivot_columns)


def row_reduce_tracked(m: Matrix) -> TrackedReduction:
    """Reduced row echelon form with unit pivots, plus T with T @ m == reduced.

    The pivot is the first nonzero entry, top to bottom, in the leftmost column
    not yet resolved; pivot rows are scaled from the left by the pivot inverse.
    """
    red, tr, piv = kernels.rref_rows(m.ring, m._data, m.cols)
    reduced = Matrix._raw(m.ring, red, m.rows, m.cols)
    transform = Matrix._raw(m.ring, tr, m.rows, m.rows)
    if m._rank is None:
        m._rank = len(piv)
    return TrackedReduction(reduced, transform, tuple(piv))


def invert_matrix(a: Matrix) -> Matrix:
    if a.rows != a.cols:
        raise ShapeMismatch(f"cannot invert a {a.rows}x{a.cols} matrix")
    tr = row_reduce_tracked(a)
    if tr.rank < a.rows:
        raise SingularMatrix(f"matrix has rank {tr.rank} < {a.rows}")
    return tr.transform


# -- block assembly -------------------------------------------------------------

class _Identity:
    def __repr__(self) -> str:
        return "IDENTITY"


IDENTITY = _Identity()


def _is_zero_slot(x: Any) -> bool:
    return x is None or (isinstance(x, int) and not isinstance(x, bool) and x == 0)


def block(grid: Sequence[Sequence[Any]], ring: RingDescriptor | None = None) -> Matrix:
    """Assemble a block matrix.

    Slots are Matrix objects, ``0``/``None`` for a zero block or ``IDENTITY``.
    Placeholder sizes are inferred from the other blocks in the same grid row
    and grid column.
    """
    nr = len(grid)
    if nr == 0:
        raise ShapeMismatch("block grid is empty")
    nc = len(grid[0])
    for i, row in enumerate(grid):
        if len(row) != nc:
            raise ShapeMismatch(f"block grid row {i} has {len(row)} slots, expected {nc}")
        for j, x in enumerate(row):
            if isinstance(x, Matrix):
                if ring is None:
                    ring = x.ring
                elif x.ring != ring:
                    raise ShapeMismatch(f"block ({i},{j}) is over {x.ring.label}, expected {ring.label}")
            elif not (_is_zero_slot(x) or x is IDENTITY):
                raise ShapeMismatch(f"block ({i},{j}) is not a matrix or placeholder: {x!r}")
    if ring is None:
        raise ShapeMismatch("block grid has no matrix to fix the ring")
    heights: list[int | None] = [None] * nr
    widths: list[int | None] = [None] * nc
    for i, row in enumerate(grid):
        for j, x in enumerate(row):
            if isinstance(x, Matrix):
                if heights[i] is None:
                    heights[i] = x.rows
                elif heights[i] != x.rows:
                    raise ShapeMismatch(f"block ({i},{j}) has {x.rows} rows, expected {heights[i]}")
                if widths[j] is None:
                    widths[j] = x.cols
                elif widths[j] != x.cols:
                    raise ShapeMismatch(f"block ({i},{j}) has {x.cols} columns, expected {widths[j]}")
    changed = True
    while changed:
        changed = False
        for i, row in enumerate(grid):
            for j, x in enumerate(row):
                if x is IDENTITY:
                    h, w = heights[i], widths[j]
                    if h is None and w is not None:
                        heights[i] = w
                        changed = True
                    elif w is None and h is not None:
                        widths[j] = h
                        changed = True
    for i, row in enumerate(grid):
        for j, x in enumerate(row):
            if heights[i] is None or widths[j] is None:
                raise ShapeMismatch(f"cannot infer the size of block ({i},{j})")
            if x is IDENTITY and heights[i] != widths[j]:
                raise ShapeMismatch(f"identity block ({i},{j}) would be {heights[i]}x{widths[j]}")
    z, o = ring.zero, ring.one
    out = []
    for i, row in enumerate(grid):
        h = heights[i]
        pieces = []
        for j, x in enumerate(row):
            w = widths[j]
            if isinstance(x, Matrix):
                pieces.append(x._data)
            elif x is IDENTITY:
                pieces.append(tuple(tuple(o if a == b else z for b in range(w)) for a in range(h)))
            else:
                pieces.append(tuple((z,) * w for _ in range(h)))
        for a in range(h):
            out.append(tuple(e for piece in pieces for e in piece[a]))
    return Matrix._raw(ring, tuple(out), sum(heights), sum(widths))


def hstack(*mats: Matrix) -> Matrix:
    return block([list(mats)])


def vstack(*mats: Matrix) -> Matrix:
    return block([[m] for m in mats])


# -- solving and subspaces ----------------------------------------------------

def row_basis(m: Matrix) -> Matrix:
    """Basis of the row (left) space, as the nonzero rows of the reduced form."""
    tr = row_reduce_tracked(m)
    return tr.reduced.submatrix(0, tr.rank, 0, m.cols)


def left_null_space(m: Matrix) -> Matrix:
    """Rows y with y @ m == 0, forming a basis of the left null space."""
    tr = row_reduce_tracked(m)
    return tr.transform.submatrix(tr.rank, m.rows, 0, m.rows)


def right_null_space(m: Matrix) -> Matrix:
    """Columns x with m @ x == 0, forming a basis of the right null space."""
    return conjugate_transpose(left_null_space(conjugate_transpose(m)))


def solve_left(m: Matrix, b: Matrix) -> Matrix:
    """Some Y with Y @ m == b; raises Infeasible if none exists."""
    if b.cols != m.cols:
        raise ShapeMismatch(f"right-hand side has {b.cols} columns, expected {m.cols}")
    tr = row_reduce_tracked(m)
    r = tr.rank
    coeff = b.take_cols(tr.pivot_columns)
    if coeff @ tr.reduced.submatrix(0, r, 0, m.cols) != b:
        raise Infeasible("right-hand side is not in the row space")
    return coeff @ tr.transform.submatrix(0, r, 0, m.rows)


def solve_right(m: Matrix, b: Matrix) -> Matrix:
    """Some X with m @ X == b; raises Infeasible if none exists."""
    return conjugate_transpose(solve_left(conjugate_transpose(m), conjugate_transpose(b)))
