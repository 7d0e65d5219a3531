"""Canonical forms of a matrix quaternity (A, B, C, D) and its dual array (E, F, G, H).

A is m x p, B is m x q, C is s x p and D is t x p. Every block size of the
canonical form is an integer combination of ranks of a fixed list of block
matrices, so the invariants never need the transforms. The transforms are
constructed separately by :func:`decompose_quaternity` and verified by
multiplication.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

from .errors import DecompositionFailure, Infeasible, InternalInconsistency, ShapeMismatch, SingularMatrix
from .matrix import (
    IDENTITY,
    Matrix,
    block,
    conjugate_transpose,
    hstack,
    invert_matrix,
    left_null_space,
    rank,
    row_basis,
    row_reduce_tracked,
    solve_left,
    solve_right,
    vstack,
)
from .scalar import RingDescriptor

__all__ = [
    "QuaternityInvariants",
    "DualInvariants",
    "CanonicalQuaternity",
    "CanonicalDual",
    "DecompositionCertificate",
    "DualCertificate",
    "IdentityCheck",
    "ConsistencyReport",
    "QUATERNITY_RECIPES",
    "DUAL_RECIPES",
    "quaternity_invariants",
    "dual_invariants",
    "duality_transport",
    "build_canonical_quaternity",
    "build_canonical_dual",
    "verify_consistency",
    "identity_checks",
    "decompose_quaternity",
    "decompose_dual",
]

# Block recipes: grid rows separated by ';', slots inside a row by spaces.
QUATERNITY_RECIPES: dict[str, str] = {
    "A": "A",
    "B": "B",
    "C": "C",
    "D": "D",
    "A|B": "A B",
    "A;C": "A; C",
    "A;D": "A; D",
    "A;C;D": "A; C; D",
    "C;D": "C; D",
    "AB;C0": "A B; C 0",
    "AB;D0": "A B; D 0",
    "AB;C0;D0": "A B; C 0; D 0",
    "AA;C0;0D": "A A; C 0; 0 D",
    "AAB;C00;0D0": "A A B; C 0 0; 0 D 0",
    "0AB;AA0;C00;0D0": "0 A B; A A 0; C 0 0; 0 D 0",
}

DUAL_RECIPES: dict[str, str] = {
    "E": "E",
    "F": "F",
    "G": "G",
    "H": "H",
    "E;H": "E; H",
    "E|F": "E F",
    "E|G": "E G",
    "F|G": "F G",
    "E|F|G": "E F G",
    "EF;H0": "E F; H 0",
    "EG;H0": "E G; H 0",
    "EFG;H00": "E F G; H 0 0",
    "EF0;E0G": "E F 0; E 0 G",
    "EF0;E0G;H00": "E F 0; E 0 G; H 0 0",
    "0EF0;EE0G;H000": "0 E F 0; E E 0 G; H 0 0 0",
}


def assemble(recipe: str, mats: dict[str, Matrix]) -> Matrix:
    grid = [[0 if tok == "0" else mats[tok] for tok in row.split()] for row in recipe.split(";")]
    return block(grid)


class _RankBook:
    """Ranks of named block recipes, memoized for one invariant computation."""

    def __init__(self, recipes: dict[str, str], mats: dict[str, Matrix],
                 rank_fn: Callable[[Matrix], int] = rank) -> None:
        self.recipes = recipes
        self.mats = mats
        self.rank_fn = rank_fn
        self._cache: dict[str, int] = {}

    def __getitem__(self, key: str) -> int:
        if key not in self._cache:
            self._cache[key] = self.rank_fn(assemble(self.recipes[key], self.mats))
        return self._cache[key]


def _independent_rank(m: Matrix) -> int:
    # Gauss-Jordan with transform: a separate code path from the rank kernels
    return row_reduce_tracked(m).rank


# -- invariants -----------------------------------------------------------------

@dataclass(frozen=True)
class QuaternityInvariants:
    r1: int
    r2: int
    r3: int
    r4: int
    r5: int
    r6: int
    r7: int
    r8: int
    r9: int
    r10: int
    r11: int
    r12: int
    r13: int
    r14: int
    r_theta: int
    r_pi: int
    rank_b: int
    dims: tuple[int, int, int, int, int]

    def values(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "dims"}

    def widths(self) -> dict[str, int]:
        """Derived block widths that must be nonnegative."""
        m, p, q, s, t = self.dims
        return {
            "r1-r5": self.r1 - self.r5,
            "r2-r4": self.r2 - self.r4,
            "r5-r11": self.r5 - self.r11,
            "r9-r13": self.r9 - self.r13,
            "r4-r9": self.r4 - self.r9,
            "r7-r12-r14": self.r7 - self.r12 - self.r14,
            "r3-r7": self.r3 - self.r7,
            "rank_b-r2": self.rank_b - self.r2,
            "q-rank_b": q - self.rank_b,
            "m-rank_b-r1": m - self.rank_b - self.r1,
            "s-r3-r4-r5": s - self.r3 - self.r4 - self.r5,
            "p-remainder": self.p_partition()[-1],
            "t-remainder": self.d_rows()[-1],
        }

    def p_partition(self) -> tuple[int, ...]:
        """The 18 column blocks shared by S_a, S_c and S_d."""
        p = self.dims[1]
        head = (
            self.r11, self.r5 - self.r11, self.r10, self.r13, self.r14, self.r_theta,
            self.r13, self.r9 - self.r13, self.r4 - self.r9,
            self.r8, self.r12, self.r_pi, self.r12, self.r14,
            self.r7 - self.r12 - self.r14, self.r3 - self.r7, self.r6,
        )
        return head + (p - sum(head),)

    def a_rows(self) -> tuple[int, int, int, int]:
        m = self.dims[0]
        return (self.r2, self.rank_b - self.r2, self.r1, m - self.rank_b - self.r1)

    def c_rows(self) -> tuple[int, int, int, int]:
        s = self.dims[3]
        return (self.r5, self.r4, self.r3, s - self.r3 - self.r4 - self.r5)

    def d_rows(self) -> tuple[int, ...]:
        t = self.dims[4]
        head = (self.r11, self.r10, self.r13, self.r9 - self.r13, self.r12, self.r14,
                self.r7 - self.r12 - self.r14, self.r8, self.r6)
        return head + (t - sum(head),)

    def negatives(self) -> dict[str, int]:
        bad = {k: v for k, v in self.values().items() if v < 0}
        bad.update({k: v for k, v in self.widths().items() if v < 0})
        return bad

    def to_json(self) -> dict:
        out = self.values()
        out["dims"] = list(self.dims)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "QuaternityInvariants":
        kw = {f.name: int(obj[f.name]) for f in fields(cls) if f.name != "dims"}
        return cls(dims=tuple(int(x) for x in obj["dims"]), **kw)


def _check_quaternity(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> tuple[int, int, int, int, int]:
    ring = A.ring
    for name, M in (("B", B), ("C", C), ("D", D)):
        if M.ring != ring:
            raise ShapeMismatch(f"{name} is over {M.ring.label}, A is over {ring.label}")
    m, p = A.shape
    if B.rows != m:
        raise ShapeMismatch(f"B has {B.rows} rows, A has {m}")
    if C.cols != p:
        raise ShapeMismatch(f"C has {C.cols} columns, A has {p}")
    if D.cols != p:
        raise ShapeMismatch(f"D has {D.cols} columns, A has {p}")
    return (m, p, B.cols, C.rows, D.rows)


def _invariants_from_ranks(rk, dims) -> QuaternityInvariants:
    A, B, C, D = rk["A"], rk["B"], rk["C"], rk["D"]
    AB, AC, AD, ACD, CD = rk["A|B"], rk["A;C"], rk["A;D"], rk["A;C;D"], rk["C;D"]
    ABC, ABD, ABCD = rk["AB;C0"], rk["AB;D0"], rk["AB;C0;D0"]
    AA, AAB, BIG = rk["AA;C0;0D"], rk["AAB;C00;0D0"], rk["0AB;AA0;C00;0D0"]
    r1 = AB - B
    r2 = A + B - AB
    r3 = AC - A
    r4 = ABC + A - AB - AC
    r5 = C + AB - ABC
    r6 = ACD - AC
    r7 = AD + AC - A - ACD
    r8 = BIG - AD - ABC
    r9 = ABC + ABD - BIG + A - AB
    r10 = AAB - C - ABD
    r11 = C + D + AB - AAB
    r12 = AC + AD - ACD + ABCD - BIG
    r13 = ABC + ABD + AA - AAB - BIG
    r14 = CD - ABCD - AA + BIG
    return QuaternityInvariants(
        r1, r2, r3, r4, r5, r6, r7, r8, r9, r10, r11, r12, r13, r14,
        r_theta=r1 - r5 - r10 - r13 - r14,
        r_pi=r2 - r4 - r8 - r12,
        rank_b=B,
        dims=dims,
    )


def quaternity_invariants(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> QuaternityInvariants:
    dims = _check_quaternity(A, B, C, D)
    book = _RankBook(QUATERNITY_RECIPES, {"A": A, "B": B, "C": C, "D": D})
    inv = _invariants_from_ranks(book, dims)
    bad = inv.negatives()
    if bad:
        raise InternalInconsistency(f"negative block sizes {bad}")
    return inv


@dataclass(frozen=True)
class DualInvariants:
    v1: int
    v2: int
    v3: int
    v4: int
    v5: int
    v6: int
    v7: int
    v8: int
    v9: int
    v10: int
    v11: int
    v12: int
    v13: int
    v14: int
    v15: int
    v16: int
    v17: int
    rank_h: int
    dims: tuple[int, int, int, int, int]

    def values(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "dims"}

    def v(self, i: int) -> int:
        return getattr(self, f"v{i}")

    def g_rows(self) -> tuple[int, ...]:
        """The 18 row blocks shared by S_e, S_f and S_g."""
        v = self.v
        head = (
            v(9), v(4) - v(9), v(10), v(11), v(12), v(5) - v(10) - v(11) - v(12),
            v(11), v(13), v(6) - v(11) - v(13),
            v(14), v(15), v(7) - v(14) - v(15), v(15), v(12), v(16),
            v(8) - v(15) - v(12) - v(16), v(17),
        )
        return head + (self.dims[0] - sum(head),)

    def e_cols(self) -> tuple[int, int, int, int]:
        m1 = self.dims[1]
        return (self.v1, self.v3, self.v2, m1 - self.v1 - self.v2 - self.v3)

    def f_cols(self) -> tuple[int, int, int, int]:
        s1 = self.dims[3]
        return (self.v4, self.v6, self.v8, s1 - self.v4 - self.v6 - self.v8)

    def g_cols(self) -> tuple[int, ...]:
        v = self.v
        head = (v(9), v(10), v(11), v(13), v(15), v(12), v(16), v(14), v(17))
        return head + (self.dims[4] - sum(head),)

    def widths(self) -> dict[str, int]:
        p1, m1, q1, s1, t1 = self.dims
        v = self.v
        return {
            "v4-v9": v(4) - v(9),
            "v5-v10-v11-v12": v(5) - v(10) - v(11) - v(12),
            "v6-v11-v13": v(6) - v(11) - v(13),
            "v7-v14-v15": v(7) - v(14) - v(15),
            "v8-v15-v12-v16": v(8) - v(15) - v(12) - v(16),
            "p1-remainder": self.g_rows()[-1],
            "m1-remainder": self.e_cols()[-1],
            "s1-remainder": self.f_cols()[-1],
            "t1-remainder": self.g_cols()[-1],
            "q1-rank_h": q1 - self.rank_h,
        }

    def negatives(self) -> dict[str, int]:
        bad = {k: x for k, x in self.values().items() if x < 0}
        bad.update({k: x for k, x in self.widths().items() if x < 0})
        return bad

    def to_json(self) -> dict:
        out = self.values()
        out["dims"] = list(self.dims)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DualInvariants":
        kw = {f.name: int(obj[f.name]) for f in fields(cls) if f.name != "dims"}
        return cls(dims=tuple(int(x) for x in obj["dims"]), **kw)


def _check_dual(E: Matrix, F: Matrix, G: Matrix, H: Matrix) -> tuple[int, int, int, int, int]:
    ring = E.ring
    for name, M in (("F", F), ("G", G), ("H", H)):
        if M.ring != ring:
            raise ShapeMismatch(f"{name} is over {M.ring.label}, E is over {ring.label}")
    p1, m1 = E.shape
    if F.rows != p1:
        raise ShapeMismatch(f"F has {F.rows} rows, E has {p1}")
    if G.rows != p1:
        raise ShapeMismatch(f"G has {G.rows} rows, E has {p1}")
    if H.cols != m1:
        raise ShapeMismatch(f"H has {H.cols} columns, E has {m1}")
    return (p1, m1, H.rows, F.cols, G.cols)


def dual_invariants(E: Matrix, F: Matrix, G: Matrix, H: Matrix) -> DualInvariants:
    dims = _check_dual(E, F, G, H)
    rk = _RankBook(DUAL_RECIPES, {"E": E, "F": F, "G": G, "H": H})
    e, f, g, h = rk["E"], rk["F"], rk["G"], rk["H"]
    eh, ef, eg, fg, efg = rk["E;H"], rk["E|F"], rk["E|G"], rk["F|G"], rk["E|F|G"]
    efh, egh, efgh = rk["EF;H0"], rk["EG;H0"], rk["EFG;H00"]
    e2, e2h, big = rk["EF0;E0G"], rk["EF0;E0G;H00"], rk["0EF0;EE0G;H000"]
    inv = DualInvariants(
        v1=e + h - eh,
        v2=eh - h,
        v3=eh - e,
        v4=f + eh - efh,
        v5=efh - f - h,
        v6=efh + e - eh - ef,
        v7=ef + h - efh,
        v8=ef - e,
        v9=f + g + eh - e2h,
        v10=e2h - f - egh,
        v11=efh + egh + e2 - e2h - big,
        v12=fg - efgh - e2 + big,
        v13=e - eh - e2 + e2h,
        v14=big - eg - efh,
        v15=ef + eg - efg + efgh - big,
        v16=e2 - e - fg,
        v17=efg - ef,
        rank_h=h,
        dims=dims,
    )
    bad = inv.negatives()
    if bad:
        raise InternalInconsistency(f"negative dual block sizes {bad}")
    return inv


def duality_transport(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> DualInvariants:
    """Dual invariants of (E, F, G, H) = (A*, C*, D*, B*)."""
    _check_quaternity(A, B, C, D)
    return dual_invariants(conjugate_transpose(A), conjugate_transpose(C),
                           conjugate_transpose(D), conjugate_transpose(B))


# -- canonical matrices -----------------------------------------------------------

def _offsets(sizes) -> list[int]:
    out, acc = [], 0
    for s in sizes:
        out.append(acc)
        acc += s
    return out


def _place(ring: RingDescriptor, row_sizes, col_sizes, ones) -> Matrix:
    """0/1 matrix with identity blocks at the (row block, col block) pairs in ``ones``."""
    if any(x < 0 for x in row_sizes) or any(x < 0 for x in col_sizes):
        raise InternalInconsistency(f"negative partition {tuple(row_sizes)} / {tuple(col_sizes)}")
    ro, co = _offsets(row_sizes), _offsets(col_sizes)
    data = [[ring.zero] * sum(col_sizes) for _ in range(sum(row_sizes))]
    for rb, cb in ones:
        if row_sizes[rb] != col_sizes[cb]:
            raise InternalInconsistency(f"identity block ({rb},{cb}) is not square")
        for k in range(row_sizes[rb]):
            data[ro[rb] + k][co[cb] + k] = ring.one
    return Matrix._raw(ring, tuple(map(tuple, data)), sum(row_sizes), sum(col_sizes))


@dataclass(frozen=True)
class CanonicalQuaternity:
    S_a: Matrix
    S_b: Matrix
    S_c: Matrix
    S_d: Matrix
    column_partition_p: tuple[int, ...]
    a_rows: tuple[int, ...]
    c_rows: tuple[int, ...]
    d_rows: tuple[int, ...]

    def matrices(self) -> dict[str, Matrix]:
        return {"S_a": self.S_a, "S_b": self.S_b, "S_c": self.S_c, "S_d": self.S_d}


# identity-block positions, indexed into the 18-block column partition
_A_ONES = [(0, j) for j in range(6, 12)] + [(2, j) for j in range(0, 6)]
_C_ONES = [(0, 0), (0, 1), (1, 6), (1, 7), (1, 8), (2, 12), (2, 13), (2, 14), (2, 15)]
_D_ONES = [(0, 0), (1, 2), (2, 3), (2, 6), (3, 7), (4, 10), (4, 12), (5, 4), (5, 13), (6, 14), (7, 9), (8, 16)]


def _spread(row_sizes, col_sizes, ones):
    """Expand (row block, col block) identity pairs so row blocks may span several columns.

    A row block of size k that carries identities on several column blocks
    (each of size k) is fine; a row block spanning a run of column blocks with
    different sizes (S_a, S_c) is split into one sub-row per column block.
    """
    rows, pairs = [], []
    for rb, size in enumerate(row_sizes):
        targets = [cb for (r, cb) in ones if r == rb]
        if targets and sum(col_sizes[cb] for cb in targets) == size and len(targets) > 1:
            for cb in targets:
                pairs.append((len(rows), cb))
                rows.append(col_sizes[cb])
        else:
            for cb in targets:
                pairs.append((len(rows), cb))
            rows.append(size)
    return rows, pairs


def _build(ring: RingDescriptor, row_sizes, col_sizes, ones) -> Matrix:
    rows, pairs = _spread(row_sizes, col_sizes, ones)
    return _place(ring, rows, col_sizes, pairs)


def build_canonical_quaternity(inv: QuaternityInvariants, ring: RingDescriptor | None = None) -> CanonicalQuaternity:
    from .scalar import QQ

    ring = ring or QQ
    m, p, q, s, t = inv.dims
    bad = inv.negatives()
    if bad:
        raise InternalInconsistency(f"negative block sizes {bad}")
    cols = inv.p_partition()
    a_rows, c_rows, d_rows = inv.a_rows(), inv.c_rows(), inv.d_rows()
    if sum(cols) != p or sum(a_rows) != m or sum(c_rows) != s or sum(d_rows) != t:
        raise InternalInconsistency("partitions do not sum to the declared dimensions")
    S_a = _build(ring, a_rows, cols, _A_ONES)
    S_b = _place(ring, (inv.rank_b, m - inv.rank_b), (inv.rank_b, q - inv.rank_b), [(0, 0)])
    S_c = _build(ring, c_rows, cols, _C_ONES)
    S_d = _place(ring, d_rows, cols, _D_ONES)
    return CanonicalQuaternity(S_a, S_b, S_c, S_d, cols, a_rows, c_rows, d_rows)


@dataclass(frozen=True)
class CanonicalDual:
    S_e: Matrix
    S_f: Matrix
    S_g: Matrix
    S_h: Matrix
    row_partition_p1: tuple[int, ...]
    e_cols: tuple[int, ...]
    f_cols: tuple[int, ...]
    g_cols: tuple[int, ...]

    def matrices(self) -> dict[str, Matrix]:
        return {"S_e": self.S_e, "S_f": self.S_f, "S_g": self.S_g, "S_h": self.S_h}


def _transpose_pairs(ones):
    return [(c, r) for r, c in ones]


def build_canonical_dual(inv: DualInvariants, ring: RingDescriptor | None = None) -> CanonicalDual:
    from .scalar import QQ

    ring = ring or QQ
    p1, m1, q1, s1, t1 = inv.dims
    bad = inv.negatives()
    if bad:
        raise InternalInconsistency(f"negative dual block sizes {bad}")
    rows = inv.g_rows()
    e_cols, f_cols, g_cols = inv.e_cols(), inv.f_cols(), inv.g_cols()
    if sum(rows) != p1 or sum(e_cols) != m1 or sum(f_cols) != s1 or sum(g_cols) != t1:
        raise InternalInconsistency("dual partitions do not sum to the declared dimensions")
    # columns of S_e read (v1, v3, v2, rest) = the row blocks of S_a, so build S_a-shaped and transpose
    a_like = (inv.v1, inv.v3, inv.v2, e_cols[3])
    c_like = (inv.v4, inv.v6, inv.v8, f_cols[3])
    S_e = conjugate_transpose(_build(ring, a_like, rows, _A_ONES))
    S_f = conjugate_transpose(_build(ring, c_like, rows, _C_ONES))
    S_g = _place(ring, rows, g_cols, _transpose_pairs(_D_ONES))
    S_h = _place(ring, (inv.rank_h, q1 - inv.rank_h), (inv.rank_h, m1 - inv.rank_h), [(0, 0)])
    return CanonicalDual(S_e, S_f, S_g, S_h, rows, e_cols, f_cols, g_cols)


# -- consistency ------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class ConsistencyReport:
    checks: tuple[IdentityCheck, ...]
    negatives: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.negatives and all(c.holds for c in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "identities": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds} for c in self.checks],
            "negative_widths": dict(self.negatives),
        }


def verify_consistency(A: Matrix, B: Matrix, C: Matrix, D: Matrix,
                       inv: QuaternityInvariants | None = None) -> ConsistencyReport:
    """Re-check the eight rank identities with independently computed ranks.

    The r-values come from ``inv``; the block-matrix ranks on the other side are
    recomputed by Gauss-Jordan reduction, not by the rank kernel.
    """
    dims = _check_quaternity(A, B, C, D)
    if inv is None:
        inv = quaternity_invariants(A, B, C, D)
    rk = _RankBook(QUATERNITY_RECIPES, {"A": A, "B": B, "C": C, "D": D}, _independent_rank)
    checks = identity_checks(inv, rk)
    negatives = inv.negatives()
    if inv.dims != dims:
        negatives = dict(negatives, dims_mismatch=-1)
    return ConsistencyReport(checks, negatives)


def identity_checks(v, rk) -> tuple[IdentityCheck, ...]:
    """The eight identities, given invariants ``v`` and block ranks ``rk[recipe]``.

    Works on any number type, so it can be evaluated on symbols.
    """
    return (
        IdentityCheck("r8+r9", v.r8 + v.r9, rk["AB;D0"] + rk["A"] - rk["A|B"] - rk["A;D"]),
        IdentityCheck("r8+r12", v.r8 + v.r12, rk["AB;C0;D0"] + rk["A;C"] - rk["AB;C0"] - rk["A;C;D"]),
        IdentityCheck("r10+r11", v.r10 + v.r11, rk["A|B"] + rk["D"] - rk["AB;D0"]),
        IdentityCheck("r10+r13+r14", v.r10 + v.r13 + v.r14,
                      rk["C;D"] + rk["AB;C0"] - rk["C"] - rk["AB;C0;D0"]),
        IdentityCheck(
            "rank(AA;C0;0D)", rk["AA;C0;0D"],
            v.r3 + 2 * v.r4 + 2 * v.r5 + v.r6 + v.r7 + 2 * v.r8 + 2 * v.r10 + v.r12
            + 2 * v.r13 + v.r14 + v.r_pi + v.r_theta,
        ),
        IdentityCheck(
            "rank(AAB;C00;0D0)", rk["AAB;C00;0D0"],
            rk["B"] - v.r2 + v.r3 + 2 * v.r4 + 2 * v.r5 + v.r6 + v.r7 + 2 * v.r8 + v.r9
            + 2 * v.r10 + v.r12 + v.r13 + v.r14 + v.r_pi + v.r_theta,
        ),
        IdentityCheck(
            "rank(0AB;AA0;C00;0D0)", rk["0AB;AA0;C00;0D0"],
            rk["B"] - v.r2 + v.r3 + 3 * v.r4 + 2 * v.r5 + v.r6 + v.r7 + 3 * v.r8 + 2 * v.r10
            + 2 * v.r12 + 2 * v.r13 + 2 * v.r14 + 2 * v.r_pi + 2 * v.r_theta,
        ),
        IdentityCheck("rank(D)", rk["D"], v.r6 + v.r7 + v.r8 + v.r9 + v.r10 + v.r11),
    )


# -- decomposition ----------------------------------------------------------------

class _Span:
    """Incrementally grown left row space with echelon bookkeeping."""

    def __init__(self, ring: RingDescriptor, n: int) -> None:
        self.ring = ring
        self.n = n
        self.basis: list[tuple[int, tuple]] = []

    def reduce(self, v: tuple) -> list:
        ring = self.ring
        sub, mul, isz = ring.sub, ring.mul, ring.is_zero
        w = list(v)
        for pc, b in self.basis:
            c = w[pc]
            if not isz(c):
                w = [sub(x, mul(c, y)) for x, y in zip(w, b)]
        return w

    def add(self, v: tuple) -> bool:
        w = self.reduce(v)
        isz = self.ring.is_zero
        pc = next((j for j, x in enumerate(w) if not isz(x)), -1)
        if pc < 0:
            return False
        inv = self.ring.inv(w[pc])
        mul = self.ring.mul
        self.basis.append((pc, tuple(mul(inv, x) for x in w)))
        return True

    def contains(self, v: tuple) -> bool:
        isz = self.ring.is_zero
        return all(isz(x) for x in self.reduce(v))


def _intersect(U: Matrix, V: Matrix) -> Matrix:
    if U.rows == 0 or V.rows == 0:
        return Matrix.zeros(U.ring, 0, U.cols)
    N = left_null_space(vstack(U, V))
    return row_basis(N.submatrix(0, N.rows, 0, U.rows) @ U)


def _space_sum(U: Matrix, V: Matrix) -> Matrix:
    return row_basis(vstack(U, V))


def _row_vec(ring: RingDescriptor, v: tuple) -> Matrix:
    return Matrix._raw(ring, (tuple(v),), 1, len(v))


@dataclass(frozen=True)
class DecompositionCertificate:
    M: Matrix
    P: Matrix
    Q: Matrix
    S: Matrix
    T: Matrix
    targets: CanonicalQuaternity

    def verify(self, A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> bool:
        t = self.targets
        return (self.M @ A @ self.P == t.S_a and self.M @ B @ self.Q == t.S_b
                and self.S @ C @ self.P == t.S_c and self.T @ D @ self.P == t.S_d)

    def to_json(self) -> dict:
        out = {k: getattr(self, k).to_json() for k in ("M", "P", "Q", "S", "T")}
        out["targets"] = {k: v.to_json() for k, v in self.targets.matrices().items()}
        return out


def _left_transform(X: Matrix, target: Matrix, stage: str) -> Matrix:
    """Nonsingular Y with Y @ X == target, given that target is reachable."""
    isz = X.ring.is_zero
    nz = [i for i, r in enumerate(target.data) if not all(isz(x) for x in r)]
    zr = [i for i, r in enumerate(target.data) if all(isz(x) for x in r)]
    try:
        sol = solve_left(X, target.take_rows(nz))
    except Infeasible as exc:
        raise DecompositionFailure(stage, "target rows are not in the row space") from exc
    null = left_null_space(X)
    if null.rows != len(zr):
        raise DecompositionFailure(stage, f"left null space has {null.rows} rows, need {len(zr)}")
    rows: list = [None] * target.rows
    for k, i in enumerate(nz):
        rows[i] = sol.data[k]
    for k, i in enumerate(zr):
        rows[i] = null.data[k]
    return Matrix._raw(X.ring, tuple(rows), target.rows, X.rows)


def _adapted_basis(A: Matrix, B: Matrix, C: Matrix, D: Matrix, inv: QuaternityInvariants) -> Matrix:
    """Rows b_0..b_{p-1} of P^{-1}, grouped by the 18 column blocks.

    Subspaces of the row space F^{1 x p}: A1 = rows of A reachable with yB = 0,
    A0 = R(A), C = R(C), D = R(D). Blocks are filled greedily, each vector taken
    independent of everything chosen so far; the mixed blocks are filled by
    splitting a vector of D into its A-part and C-part.
    """
    ring = A.ring
    p = A.cols
    kb = left_null_space(B)
    a1 = row_basis(kb @ A)
    a0 = row_basis(A)
    cs = row_basis(C)
    ds = row_basis(D)
    a1c = _intersect(a1, cs)
    a0c = _intersect(a0, cs)
    widths = inv.p_partition()
    blocks: list[list[tuple]] = [[] for _ in range(18)]
    span = _Span(ring, p)

    def fill(stage: str, space: Matrix, idx: int) -> None:
        for v in space.data:
            if span.add(v):
                blocks[idx].append(v)
        if len(blocks[idx]) != widths[idx]:
            raise DecompositionFailure(stage, f"found {len(blocks[idx])} vectors, expected {widths[idx]}")

    def fill_pair(stage: str, space: Matrix, X: Matrix, Y: Matrix, ix: int, iy: int) -> None:
        both = vstack(X, Y)
        for v in space.data:
            if span.contains(v):
                continue
            try:
                y = solve_left(both, _row_vec(ring, v))
            except Infeasible as exc:
                raise DecompositionFailure(stage, "vector does not split") from exc
            u = (y.submatrix(0, 1, 0, X.rows) @ X).data[0]
            c = (y.submatrix(0, 1, X.rows, both.rows) @ Y).data[0]
            if not (span.add(u) and span.add(c)):
                raise DecompositionFailure(stage, "split parts are dependent")
            blocks[ix].append(u)
            blocks[iy].append(c)
        if len(blocks[ix]) != widths[ix]:
            raise DecompositionFailure(stage, f"found {len(blocks[ix])} pairs, expected {widths[ix]}")

    fill("A1∩C∩D", _intersect(a1c, ds), 0)
    fill("A1∩C", a1c, 1)
    fill("A1∩D", _intersect(a1, ds), 2)
    fill("A0∩C∩D", _intersect(a0c, ds), 7)
    fill_pair("D∩(A1+A0∩C)", _intersect(ds, _space_sum(a1, a0c)), a1, a0c, 3, 6)
    fill("A0∩C", a0c, 8)
    fill("A0∩D", _intersect(a0, ds), 9)
    fill("C∩D", _intersect(cs, ds), 14)
    fill_pair("D∩(A1+C)", _intersect(ds, _space_sum(a1, cs)), a1, cs, 4, 13)
    fill_pair("D∩(A0+C)", _intersect(ds, _space_sum(a0, cs)), a0, cs, 10, 12)
    fill("C", cs, 15)
    fill("D", ds, 16)
    fill("A1", a1, 5)
    fill("A0", a0, 11)
    fill("complement", Matrix.identity(ring, p), 17)
    rows = tuple(v for b in blocks for v in b)
    return Matrix._raw(ring, rows, p, p)


def decompose_quaternity(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> DecompositionCertificate:
    """Nonsingular M, P, Q, S, T with MAP = S_a, MBQ = S_b, SCP = S_c, TDP = S_d."""
    _check_quaternity(A, B, C, D)
    ring = A.ring
    inv = quaternity_invariants(A, B, C, D)
    tg = build_canonical_quaternity(inv, ring)
    m, p, q, s, t = inv.dims
    P = invert_matrix(_adapted_basis(A, B, C, D, inv))
    AP = A @ P

    # M: rows (r2 | rank_b - r2 | r1 | rest), matching the row blocks of S_a
    n2, nb, n1, _ = inv.a_rows()
    offs = _offsets(inv.a_rows())
    try:
        top = solve_left(AP, tg.S_a.submatrix(offs[0], offs[0] + n2, 0, p))
        third = solve_left(hstack(AP, B), hstack(tg.S_a.submatrix(offs[2], offs[2] + n1, 0, p),
                                                 Matrix.zeros(ring, n1, q)))
    except Infeasible as exc:
        raise DecompositionFailure("M", "row targets of S_a unreachable") from exc
    ker = left_null_space(AP)
    tr = row_reduce_tracked(ker @ B)
    second = tr.transform.submatrix(0, tr.rank, 0, ker.rows) @ ker
    if second.rows != nb:
        raise DecompositionFailure("M", f"{second.rows} rows act on B alone, expected {nb}")
    rest = left_null_space(hstack(AP, B))
    M = vstack(top, second, third, rest)
    if M.rows != m:
        raise DecompositionFailure("M", f"assembled {M.rows} rows, expected {m}")

    # Q: right transform of the nonzero rows of MB onto [I 0]
    rb = inv.rank_b
    Z = (M @ B).submatrix(0, rb, 0, q)
    try:
        right = solve_right(Z, Matrix.identity(ring, rb))
    except Infeasible as exc:
        raise DecompositionFailure("Q", "rows of MB are dependent") from exc
    Q = hstack(right, conjugate_transpose(left_null_space(conjugate_transpose(Z))))

    S = _left_transform(C @ P, tg.S_c, "S")
    T = _left_transform(D @ P, tg.S_d, "T")
    cert = DecompositionCertificate(M, P, Q, S, T, tg)
    if not cert.verify(A, B, C, D):
        raise DecompositionFailure("verification", "a product differs from its target")
    for name in ("M", "P", "Q", "S", "T"):
        try:
            invert_matrix(getattr(cert, name))
        except SingularMatrix as exc:
            raise DecompositionFailure("verification", f"{name} is singular") from exc
    return cert


@dataclass(frozen=True)
class DualCertificate:
    P1: Matrix
    M1: Matrix
    Q1: Matrix
    S1: Matrix
    T1: Matrix
    targets: CanonicalDual

    def verify(self, E: Matrix, F: Matrix, G: Matrix, H: Matrix) -> bool:
        t = self.targets
        return (self.P1 @ E @ self.M1 == t.S_e and self.P1 @ F @ self.S1 == t.S_f
                and self.P1 @ G @ self.T1 == t.S_g and self.Q1 @ H @ self.M1 == t.S_h)

    def to_json(self) -> dict:
        out = {k: getattr(self, k).to_json() for k in ("P1", "M1", "Q1", "S1", "T1")}
        out["targets"] = {k: v.to_json() for k, v in self.targets.matrices().items()}
        return out


def decompose_dual(E: Matrix, F: Matrix, G: Matrix, H: Matrix) -> DualCertificate:
    """Nonsingular P1, M1, Q1, S1, T1 with P1 E M1 = S_e, P1 F S1 = S_f, P1 G T1 = S_g, Q1 H M1 = S_h.

    The dual array is the conjugate transpose of the quaternity (E*, H*, F*, G*),
    so the transforms are the conjugate transposes of that decomposition.
    """
    _check_dual(E, F, G, H)
    ct = conjugate_transpose
    inner = decompose_quaternity(ct(E), ct(H), ct(F), ct(G))
    targets = build_canonical_dual(dual_invariants(E, F, G, H), E.ring)
    cert = DualCertificate(ct(inner.P), ct(inner.M), ct(inner.Q), ct(inner.S), ct(inner.T), targets)
    if not cert.verify(E, F, G, H):
        raise DecompositionFailure("dual verification", "a product differs from its target")
    return cert


def invariants_dumps(inv: QuaternityInvariants | DualInvariants) -> str:
    return json.dumps(inv.to_json(), sort_keys=True)
