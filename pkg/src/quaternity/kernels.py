"""Backend selection and payload <-> integer conversion for the hot loops.

Rank and reduction over Q and H(Q) run fraction-free on integers: each row is
scaled by the lcm of its denominators (a real, hence central, scalar) and the
pivot inverses are applied only once at the end. GF(p) runs on residues.

The compiled module is used when importable; set ``QUATERNITY_PURE_PYTHON=1``
to force the fallback, or call :func:`set_backend`.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from fractions import Fraction
from math import lcm
from typing import Iterator

from . import _pykernels
from .scalar import RingDescriptor, RingKind

try:
    if os.environ.get("QUATERNITY_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _ckernels  # type: ignore[attr-defined]
except ImportError:
    _ckernels = None

COMPILED_AVAILABLE = _ckernels is not None
_active = _ckernels if COMPILED_AVAILABLE else _pykernels


def backend() -> str:
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def set_backend(name: str) -> None:
    global _active
    if name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available")
        _active = _ckernels
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")


@contextmanager
def using_backend(name: str) -> Iterator[None]:
    prev = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def _call(fn: str, *args):
    try:
        return getattr(_active, fn)(*args)
    except OverflowError:
        return getattr(_pykernels, fn)(*args)


# -- conversions --------------------------------------------------------------

def _q_int_rows(rows) -> tuple[list[list[int]], list[int]]:
    out, scales = [], []
    for r in rows:
        s = lcm(*(x.denominator for x in r)) if r else 1
        out.append([x.numerator * (s // x.denominator) for x in r])
        scales.append(s)
    return out, scales


def _h_int_rows(rows) -> tuple[list[list[int]], list[int]]:
    out, scales = [], []
    for r in rows:
        s = lcm(*(c.denominator for x in r for c in x)) if r else 1
        out.append([c.numerator * (s // c.denominator) for x in r for c in x])
        scales.append(s)
    return out, scales


# -- public kernels on payload rows ----------------------------------------------

def rank_rows(ring: RingDescriptor, rows, ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    kind = ring.kind
    if kind is RingKind.PRIME_FIELD:
        return _call("rank_mod_p", [list(r) for r in rows], ring.modulus)
    if kind is RingKind.RATIONALS:
        return _call("rank_int", _q_int_rows(rows)[0])
    return _call("rank_quat", _h_int_rows(rows)[0])


def rref_rows(ring: RingDescriptor, rows, ncols: int):
    """Reduced row echelon form with unit pivots and the left transform.

    Returns ``(reduced, transform, pivots)`` as tuples of payload rows with
    ``transform @ rows == reduced``.
    """
    n = len(rows)
    kind = ring.kind
    if kind is RingKind.PRIME_FIELD:
        if n == 0:
            return (), (), []
        r, t, piv = _call("rref_mod_p", [list(x) for x in rows], ring.modulus)
        return tuple(map(tuple, r)), tuple(map(tuple, t)), list(piv)
    if kind is RingKind.RATIONALS:
        ints, scales = _q_int_rows(rows)
        if n and ncols == 0:
            ints = [[] for _ in range(n)]
        r, t, piv = _pykernels.rref_int(ints) if n else ([], [], [])
        red, tr = [], []
        for k in range(n):
            a = r[k][piv[k]] if k < len(piv) else 1
            red.append(tuple(Fraction(x, a) for x in r[k]))
            tr.append(tuple(Fraction(t[k][j] * scales[j], a) for j in range(n)))
        return tuple(red), tuple(tr), list(piv)
    ints, scales = _h_int_rows(rows)
    r, t, piv = _pykernels.rref_quat(ints, ncols) if n else ([], [], [])
    qmul = _pykernels._qmul
    red, tr = [], []
    for k in range(n):
        if k < len(piv):
            j0 = 4 * piv[k]
            a0, a1, a2, a3 = r[k][j0:j0 + 4]
            norm = a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3
            ca = (a0, -a1, -a2, -a3)
        else:
            norm, ca = 1, (1, 0, 0, 0)
        row, trow = r[k], t[k]
        red.append(tuple(
            tuple(Fraction(v, norm) for v in qmul(*ca, *row[4 * j:4 * j + 4]))
            for j in range(ncols)
        ))
        tr.append(tuple(
            tuple(Fraction(v * scales[j], norm) for v in qmul(*ca, *trow[4 * j:4 * j + 4]))
            for j in range(n)
        ))
    return tuple(red), tuple(tr), list(piv)


def matmul_rows(ring: RingDescriptor, a, b, n: int, k: int, m: int):
    """Product of an n x k and a k x m payload matrix."""
    if n == 0 or m == 0:
        return tuple(() for _ in range(n))
    kind = ring.kind
    if k == 0:
        return tuple(tuple(ring.zero for _ in range(m)) for _ in range(n))
    if kind is RingKind.PRIME_FIELD:
        p = ring.modulus
        bt = list(zip(*b))
        return tuple(tuple(sum(x * y for x, y in zip(ra, cb)) % p for cb in bt) for ra in a)
    if kind is RingKind.RATIONALS:
        ai, sa = _q_int_rows(a)
        lb = lcm(*(x.denominator for r in b for x in r))
        bt = [[x.numerator * (lb // x.denominator) for x in col] for col in zip(*b)]
        return tuple(
            tuple(Fraction(sum(x * y for x, y in zip(ra, cb)), s * lb) for cb in bt)
            for ra, s in zip(ai, sa)
        )
    ai, sa = _h_int_rows(a)
    lb = lcm(*(c.denominator for r in b for x in r for c in x))
    bi = [[tuple(c.numerator * (lb // c.denominator) for c in x) for x in r] for r in b]
    qmul = _pykernels._qmul
    out = []
    for ra, s in zip(ai, sa):
        den = s * lb
        row = []
        for j in range(m):
            w = x = y = z = 0
            for t in range(k):
                p0, p1, p2, p3 = ra[4 * t:4 * t + 4]
                if not (p0 or p1 or p2 or p3):
                    continue
                q = bi[t][j]
                if not (q[0] or q[1] or q[2] or q[3]):
                    continue
                r0, r1, r2, r3 = qmul(p0, p1, p2, p3, *q)
                w += r0
                x += r1
                y += r2
                z += r3
            row.append((Fraction(w, den), Fraction(x, den), Fraction(y, den), Fraction(z, den)))
        out.append(tuple(row))
    return tuple(out)
