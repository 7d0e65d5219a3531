"""Pure-Python elimination kernels.

Same signatures as the compiled ``_ckernels`` module. Inputs are lists of
integer rows: residues for GF(p), integers for Q (denominators already
cleared per row), and flattened integer quaternions (4 ints per entry) for H.
Python ints never overflow, so these are also the fallback when the compiled
int64 kernels raise ``OverflowError``.
"""

from __future__ import annotations

from math import gcd


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    a = [list(r) for r in rows if any(r)]
    n = len(a)
    if n == 0:
        return 0
    m = len(a[0])
    rank = 0
    for c in range(m):
        piv = next((i for i in range(rank, n) if a[i][c]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        inv = pow(prow[c], p - 2, p)
        for j in range(c, m):
            prow[j] = prow[j] * inv % p
        for i in range(rank + 1, n):
            f = a[i][c]
            if f:
                row = a[i]
                for j in range(c, m):
                    row[j] = (row[j] - f * prow[j]) % p
        rank += 1
        if rank == n:
            break
    return rank


def rref_mod_p(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Gauss-Jordan with transform: returns (reduced, transform, pivots)."""
    n = len(rows)
    m = len(rows[0]) if n else 0
    a = [list(r) for r in rows]
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    pivots: list[int] = []
    rank = 0
    for c in range(m):
        if rank == n:
            break
        piv = next((i for i in range(rank, n) if a[i][c]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        t[rank], t[piv] = t[piv], t[rank]
        prow, ptr = a[rank], t[rank]
        inv = pow(prow[c], p - 2, p)
        if inv != 1:
            for j in range(c, m):
                prow[j] = prow[j] * inv % p
            for j in range(n):
                ptr[j] = ptr[j] * inv % p
        for i in range(n):
            if i == rank:
                continue
            f = a[i][c]
            if f:
                row, tr = a[i], t[i]
                for j in range(c, m):
                    row[j] = (row[j] - f * prow[j]) % p
                for j in range(n):
                    tr[j] = (tr[j] - f * ptr[j]) % p
        pivots.append(c)
        rank += 1
    return a, t, pivots


def _content_divide(row: list[int], start: int = 0) -> None:
    g = gcd(*row[start:])
    if g > 1:
        for j in range(start, len(row)):
            row[j] //= g


def rank_int(rows: list[list[int]]) -> int:
    """Rank over Q of an integer matrix, fraction-free with row content removal."""
    a = [list(r) for r in rows if any(r)]
    n = len(a)
    if n == 0:
        return 0
    m = len(a[0])
    rank = 0
    for c in range(m):
        piv = next((i for i in range(rank, n) if a[i][c]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        pa = prow[c]
        for i in range(rank + 1, n):
            row = a[i]
            b = row[c]
            if b:
                for j in range(c, m):
                    row[j] = pa * row[j] - b * prow[j]
                _content_divide(row, c)
        rank += 1
        if rank == n:
            break
    return rank


def _qmul(a0: int, a1: int, a2: int, a3: int, b0: int, b1: int, b2: int, b3: int) -> tuple:
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def _quat_eliminate(row: list[int], prow: list[int], c: int, m: int) -> None:
    # row <- N(a) row - (b conj(a)) prow, where a = prow[c], b = row[c]
    k = 4 * c
    a0, a1, a2, a3 = prow[k], prow[k + 1], prow[k + 2], prow[k + 3]
    b0, b1, b2, b3 = row[k], row[k + 1], row[k + 2], row[k + 3]
    norm = a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3
    f0, f1, f2, f3 = _qmul(b0, b1, b2, b3, a0, -a1, -a2, -a3)
    for j in range(k, 4 * m, 4):
        y0, y1, y2, y3 = prow[j], prow[j + 1], prow[j + 2], prow[j + 3]
        if not (y0 or y1 or y2 or y3):
            if norm != 1:
                row[j] *= norm
                row[j + 1] *= norm
                row[j + 2] *= norm
                row[j + 3] *= norm
            continue
        z0, z1, z2, z3 = _qmul(f0, f1, f2, f3, y0, y1, y2, y3)
        row[j] = norm * row[j] - z0
        row[j + 1] = norm * row[j + 1] - z1
        row[j + 2] = norm * row[j + 2] - z2
        row[j + 3] = norm * row[j + 3] - z3


def rank_quat(rows: list[list[int]]) -> int:
    """Rank over H of an integer-quaternion matrix given as flattened rows."""
    a = [list(r) for r in rows if any(r)]
    n = len(a)
    if n == 0:
        return 0
    m = len(a[0]) // 4
    rank = 0
    for c in range(m):
        k = 4 * c
        piv = next((i for i in range(rank, n) if a[i][k] or a[i][k + 1] or a[i][k + 2] or a[i][k + 3]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        for i in range(rank + 1, n):
            row = a[i]
            if row[k] or row[k + 1] or row[k + 2] or row[k + 3]:
                _quat_eliminate(row, prow, c, m)
                _content_divide(row, k)
        rank += 1
        if rank == n:
            break
    return rank


def _joint_content_divide(row: list[int], tr: list[int]) -> None:
    g = gcd(gcd(*row), gcd(*tr))
    if g > 1:
        for j in range(len(row)):
            row[j] //= g
        for j in range(len(tr)):
            tr[j] //= g


def rref_int(rows: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Fraction-free Gauss-Jordan over Z with an integer transform.

    Returns (R, T, pivots) with T @ rows == R, R in reduced echelon form up to
    the nonzero pivot values (the caller divides them out).
    """
    n = len(rows)
    m = len(rows[0]) if n else 0
    a = [list(r) for r in rows]
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    pivots: list[int] = []
    rank = 0
    for c in range(m):
        if rank == n:
            break
        piv = next((i for i in range(rank, n) if a[i][c]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        t[rank], t[piv] = t[piv], t[rank]
        prow, ptr = a[rank], t[rank]
        pa = prow[c]
        for i in range(n):
            if i == rank:
                continue
            row = a[i]
            b = row[c]
            if b:
                tr = t[i]
                for j in range(m):
                    row[j] = pa * row[j] - b * prow[j]
                for j in range(n):
                    tr[j] = pa * tr[j] - b * ptr[j]
                _joint_content_divide(row, tr)
        pivots.append(c)
        rank += 1
    return a, t, pivots


def _quat_eliminate_full(row: list[int], prow: list[int], f: tuple, norm: int) -> None:
    f0, f1, f2, f3 = f
    for j in range(0, len(row), 4):
        y0, y1, y2, y3 = prow[j], prow[j + 1], prow[j + 2], prow[j + 3]
        if y0 or y1 or y2 or y3:
            z0, z1, z2, z3 = _qmul(f0, f1, f2, f3, y0, y1, y2, y3)
        else:
            z0 = z1 = z2 = z3 = 0
        row[j] = norm * row[j] - z0
        row[j + 1] = norm * row[j + 1] - z1
        row[j + 2] = norm * row[j + 2] - z2
        row[j + 3] = norm * row[j + 3] - z3


def rref_quat(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Fraction-free Gauss-Jordan over integer quaternions, flattened rows.

    Row updates are left multiplications only, so T @ rows == R holds in H.
    """
    n = len(rows)
    a = [list(r) for r in rows]
    t = [[0] * (4 * n) for _ in range(n)]
    for i in range(n):
        t[i][4 * i] = 1
    pivots: list[int] = []
    rank = 0
    for c in range(ncols):
        if rank == n:
            break
        k = 4 * c
        piv = next((i for i in range(rank, n) if a[i][k] or a[i][k + 1] or a[i][k + 2] or a[i][k + 3]), -1)
        if piv < 0:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        t[rank], t[piv] = t[piv], t[rank]
        prow, ptr = a[rank], t[rank]
        a0, a1, a2, a3 = prow[k], prow[k + 1], prow[k + 2], prow[k + 3]
        norm = a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3
        for i in range(n):
            if i == rank:
                continue
            row = a[i]
            b0, b1, b2, b3 = row[k], row[k + 1], row[k + 2], row[k + 3]
            if b0 or b1 or b2 or b3:
                f = _qmul(b0, b1, b2, b3, a0, -a1, -a2, -a3)
                _quat_eliminate_full(row, prow, f, norm)
                _quat_eliminate_full(t[i], ptr, f, norm)
                _joint_content_divide(row, t[i])
        pivots.append(c)
        rank += 1
    return a, t, pivots
