# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels (int64 with 128-bit intermediates).

Mirrors the pure-Python module ``_pykernels``. Integer and quaternion kernels
raise OverflowError as soon as an entry leaves [-2**62, 2**62]; the dispatcher
then reruns the pure-Python version on unbounded ints.
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef long long LIM = 4611686018427387904  # 2**62


cdef long long* _alloc(Py_ssize_t k) except NULL:
    cdef long long* buf = <long long*> malloc((k if k > 0 else 1) * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    return buf


cdef long long* _load(list rows, Py_ssize_t n, Py_ssize_t m) except NULL:
    cdef long long* buf = _alloc(n * m)
    cdef Py_ssize_t i, j
    cdef long long v
    try:
        for i in range(n):
            row = rows[i]
            if len(row) != m:
                raise ValueError("ragged rows")
            for j in range(m):
                v = row[j]
                if v > LIM or v < -LIM:
                    raise OverflowError("entry exceeds int64 working range")
                buf[i * m + j] = v
    except BaseException:
        free(buf)
        raise
    return buf


cdef list _dump(long long* buf, Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t i, j
    return [[buf[i * m + j] for j in range(m)] for i in range(n)]


cdef long long _inv_mod(long long a, long long p):
    cdef long long t = 0, nt = 1, r = p, nr = a % p, q, tmp
    while nr != 0:
        q = r // nr
        tmp = t - q * nt; t = nt; nt = tmp
        tmp = r - q * nr; r = nr; nr = tmp
    if t < 0:
        t += p
    return t


cdef inline long long _gcd(long long a, long long b):
    cdef long long t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef void _swap_rows(long long* buf, Py_ssize_t m, Py_ssize_t r1, Py_ssize_t r2):
    cdef Py_ssize_t j
    cdef long long tmp
    if r1 == r2:
        return
    for j in range(m):
        tmp = buf[r1 * m + j]
        buf[r1 * m + j] = buf[r2 * m + j]
        buf[r2 * m + j] = tmp


def rank_mod_p(list rows, long long p):
    cdef Py_ssize_t n = len(rows)
    if n == 0:
        return 0
    cdef Py_ssize_t m = len(rows[0])
    if m == 0:
        return 0
    if p >= 2147483648:
        raise OverflowError("modulus too large for the compiled kernel")
    cdef long long* a = _load(rows, n, m)
    cdef Py_ssize_t rank = 0, c, i, j, piv
    cdef long long inv, f
    for c in range(m):
        piv = -1
        for i in range(rank, n):
            if a[i * m + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        _swap_rows(a, m, piv, rank)
        inv = _inv_mod(a[rank * m + c], p)
        for j in range(c, m):
            a[rank * m + j] = a[rank * m + j] * inv % p
        for i in range(rank + 1, n):
            f = a[i * m + c]
            if f != 0:
                for j in range(c, m):
                    a[i * m + j] = (a[i * m + j] + p - f * a[rank * m + j] % p) % p
        rank += 1
        if rank == n:
            break
    free(a)
    return rank


def rref_mod_p(list rows, long long p):
    cdef Py_ssize_t n = len(rows)
    cdef Py_ssize_t m = len(rows[0]) if n else 0
    if p >= 2147483648:
        raise OverflowError("modulus too large for the compiled kernel")
    cdef long long* a = _load(rows, n, m)
    cdef long long* t = _alloc(n * n)
    cdef Py_ssize_t rank = 0, c, i, j, piv
    cdef long long inv, f
    for i in range(n * n):
        t[i] = 0
    for i in range(n):
        t[i * n + i] = 1
    pivots = []
    for c in range(m):
        if rank == n:
            break
        piv = -1
        for i in range(rank, n):
            if a[i * m + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        _swap_rows(a, m, piv, rank)
        _swap_rows(t, n, piv, rank)
        inv = _inv_mod(a[rank * m + c], p)
        if inv != 1:
            for j in range(c, m):
                a[rank * m + j] = a[rank * m + j] * inv % p
            for j in range(n):
                t[rank * n + j] = t[rank * n + j] * inv % p
        for i in range(n):
            if i == rank:
                continue
            f = a[i * m + c]
            if f != 0:
                for j in range(c, m):
                    a[i * m + j] = (a[i * m + j] + p - f * a[rank * m + j] % p) % p
                for j in range(n):
                    t[i * n + j] = (t[i * n + j] + p - f * t[rank * n + j] % p) % p
        pivots.append(c)
        rank += 1
    reduced = _dump(a, n, m)
    transform = _dump(t, n, n)
    free(a)
    free(t)
    return reduced, transform, pivots


cdef int _reduce_content(long long* row, Py_ssize_t start, Py_ssize_t stop):
    cdef long long g = 0
    cdef Py_ssize_t j
    for j in range(start, stop):
        if row[j] != 0:
            g = _gcd(g, row[j])
            if g == 1:
                return 0
    if g > 1:
        for j in range(start, stop):
            row[j] = row[j] // g
    return 0


def rank_int(list rows):
    cdef Py_ssize_t n = len(rows)
    if n == 0:
        return 0
    cdef Py_ssize_t m = len(rows[0])
    if m == 0:
        return 0
    cdef long long* a = _load(rows, n, m)
    cdef Py_ssize_t rank = 0, c, i, j, piv
    cdef long long pa, b
    cdef i128 v
    try:
        for c in range(m):
            piv = -1
            for i in range(rank, n):
                if a[i * m + c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            _swap_rows(a, m, piv, rank)
            pa = a[rank * m + c]
            for i in range(rank + 1, n):
                b = a[i * m + c]
                if b != 0:
                    for j in range(c, m):
                        v = <i128> pa * a[i * m + j] - <i128> b * a[rank * m + j]
                        if v > LIM or v < -LIM:
                            raise OverflowError("int64 working range exceeded")
                        a[i * m + j] = <long long> v
                    _reduce_content(a + i * m, c, m)
            rank += 1
            if rank == n:
                break
    finally:
        free(a)
    return rank


def rank_quat(list rows):
    """Rows are flattened integer quaternions (4 ints per entry)."""
    cdef Py_ssize_t n = len(rows)
    if n == 0:
        return 0
    cdef Py_ssize_t w = len(rows[0])
    cdef Py_ssize_t m = w // 4
    if m == 0:
        return 0
    cdef long long* a = _load(rows, n, w)
    cdef Py_ssize_t rank = 0, c, i, j, piv, k
    cdef long long a0, a1, a2, a3, b0, b1, b2, b3, f0, f1, f2, f3, y0, y1, y2, y3
    cdef i128 norm, v0, v1, v2, v3, z0, z1, z2, z3
    cdef long long* row
    cdef long long* prow
    try:
        for c in range(m):
            k = 4 * c
            piv = -1
            for i in range(rank, n):
                row = a + i * w
                if row[k] != 0 or row[k + 1] != 0 or row[k + 2] != 0 or row[k + 3] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            _swap_rows(a, w, piv, rank)
            prow = a + rank * w
            a0 = prow[k]; a1 = prow[k + 1]; a2 = prow[k + 2]; a3 = prow[k + 3]
            norm = <i128> a0 * a0 + <i128> a1 * a1 + <i128> a2 * a2 + <i128> a3 * a3
            if norm > LIM:
                raise OverflowError("int64 working range exceeded")
            for i in range(rank + 1, n):
                row = a + i * w
                b0 = row[k]; b1 = row[k + 1]; b2 = row[k + 2]; b3 = row[k + 3]
                if b0 == 0 and b1 == 0 and b2 == 0 and b3 == 0:
                    continue
                # f = b * conj(a)
                v0 = <i128> b0 * a0 + <i128> b1 * a1 + <i128> b2 * a2 + <i128> b3 * a3
                v1 = -(<i128> b0 * a1) + <i128> b1 * a0 - <i128> b2 * a3 + <i128> b3 * a2
                v2 = -(<i128> b0 * a2) + <i128> b1 * a3 + <i128> b2 * a0 - <i128> b3 * a1
                v3 = -(<i128> b0 * a3) - <i128> b1 * a2 + <i128> b2 * a1 + <i128> b3 * a0
                if (v0 > LIM or v0 < -LIM or v1 > LIM or v1 < -LIM
                        or v2 > LIM or v2 < -LIM or v3 > LIM or v3 < -LIM):
                    raise OverflowError("int64 working range exceeded")
                f0 = <long long> v0; f1 = <long long> v1; f2 = <long long> v2; f3 = <long long> v3
                for j in range(k, w, 4):
                    y0 = prow[j]; y1 = prow[j + 1]; y2 = prow[j + 2]; y3 = prow[j + 3]
                    z0 = <i128> f0 * y0 - <i128> f1 * y1 - <i128> f2 * y2 - <i128> f3 * y3
                    z1 = <i128> f0 * y1 + <i128> f1 * y0 + <i128> f2 * y3 - <i128> f3 * y2
                    z2 = <i128> f0 * y2 - <i128> f1 * y3 + <i128> f2 * y0 + <i128> f3 * y1
                    z3 = <i128> f0 * y3 + <i128> f1 * y2 - <i128> f2 * y1 + <i128> f3 * y0
                    v0 = norm * row[j] - z0
                    v1 = norm * row[j + 1] - z1
                    v2 = norm * row[j + 2] - z2
                    v3 = norm * row[j + 3] - z3
                    if (v0 > LIM or v0 < -LIM or v1 > LIM or v1 < -LIM
                            or v2 > LIM or v2 < -LIM or v3 > LIM or v3 < -LIM):
                        raise OverflowError("int64 working range exceeded")
                    row[j] = <long long> v0
                    row[j + 1] = <long long> v1
                    row[j + 2] = <long long> v2
                    row[j + 3] = <long long> v3
                _reduce_content(row, k, w)
            rank += 1
            if rank == n:
                break
    finally:
        free(a)
    return rank
