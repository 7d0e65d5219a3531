"""Random instances, brute-force ground truth and reproducible fuzz campaigns."""

from __future__ import annotations

import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import canon
from .errors import CharacteristicTwo, QuaternityError, TooLarge
from .matrix import Matrix, conjugate_transpose, invert_matrix, rank
from .scalar import RingDescriptor, RingKind
from .sylvester import (
    EQUATIONS,
    HERMITIAN_KINDS,
    HERMITIAN_UNKNOWNS,
    INPUTS,
    SystemInstance,
    SystemKind,
    _evaluate,
    _token,
    check,
    cross_check,
    solve_linearized,
    unknown_shapes,
)

__all__ = [
    "gen_element",
    "gen_matrix",
    "gen_low_rank",
    "gen_nonsingular",
    "gen_quaternity",
    "gen_planted_quaternity",
    "gen_dims",
    "gen_solvable_instance",
    "gen_random_instance",
    "exhaustive_solvability",
    "exhaustive_entry_count",
    "CampaignConfig",
    "QUATERNITY_CHECKS",
    "SOLVABILITY_CHECKS",
    "NECESSITY_CHECKS",
    "ALL_CHECKS",
    "CampaignReport",
    "run_campaign",
    "replay",
]

_NUMS = range(-3, 4)
_DENS = (1, 2, 3)


def gen_element(ring: RingDescriptor, rng: random.Random) -> Any:
    if ring.kind is RingKind.PRIME_FIELD:
        return rng.randrange(ring.modulus)
    if ring.kind is RingKind.RATIONALS:
        return Fraction(rng.choice(_NUMS), rng.choice(_DENS))
    return tuple(Fraction(rng.choice(_NUMS), rng.choice(_DENS)) for _ in range(4))


def gen_matrix(ring: RingDescriptor, rows: int, cols: int, rng: random.Random) -> Matrix:
    """Uniform entries: residues mod p, or rationals n/d with n in [-3, 3], d in {1, 2, 3}."""
    data = tuple(tuple(gen_element(ring, rng) for _ in range(cols)) for _ in range(rows))
    return Matrix._raw(ring, data, rows, cols)


def gen_low_rank(ring: RingDescriptor, rows: int, cols: int, rng: random.Random, r: int | None = None) -> Matrix:
    if r is None:
        r = rng.randint(0, min(rows, cols))
    return gen_matrix(ring, rows, r, rng) @ gen_matrix(ring, r, cols, rng)


def gen_nonsingular(ring: RingDescriptor, n: int, rng: random.Random) -> Matrix:
    while True:
        M = gen_matrix(ring, n, n, rng)
        if rank(M) == n:
            return M


def _gen_coeff(ring, rows, cols, rng) -> Matrix:
    return gen_low_rank(ring, rows, cols, rng) if rng.random() < 0.6 else gen_matrix(ring, rows, cols, rng)


def gen_quaternity(ring: RingDescriptor, max_dim: int, rng: random.Random,
                   mode: str | None = None) -> tuple[Matrix, Matrix, Matrix, Matrix]:
    """A random (A, B, C, D); ``mode`` is dense, low_rank, coupled or planted."""
    mode = mode or rng.choice(("dense", "low_rank", "coupled", "planted"))
    if mode == "planted":
        return gen_planted_quaternity(ring, max_dim, rng)[1]
    m, p, q, s, t = (rng.randint(0, max_dim) for _ in range(5))
    if mode == "dense":
        g = gen_matrix
    elif mode == "low_rank":
        g = gen_low_rank
    elif mode == "coupled":
        # rows of A, C, D drawn from one small pool so their row spaces meet
        k = rng.randint(0, p)
        pool = gen_matrix(ring, k, p, rng)
        A, C, D = (gen_low_rank(ring, n, k, rng) @ pool for n in (m, s, t))
        B = A @ gen_low_rank(ring, p, q, rng) if rng.random() < 0.5 else gen_low_rank(ring, m, q, rng)
        return A, B, C, D
    else:
        raise ValueError(f"unknown quaternity mode {mode!r}")
    return g(ring, m, p, rng), g(ring, m, q, rng), g(ring, s, p, rng), g(ring, t, p, rng)


_PLANT_FREE = ("r11", "d5", "r10", "r13", "r14", "rth", "d9", "d4", "r8", "r12", "rpi", "d7", "d3", "r6",
               "p_rest", "b_extra", "m_rest", "q_rest", "s_rest", "t_rest")


def _planted_sizes(f: dict[str, int]) -> canon.QuaternityInvariants:
    r5 = f["r11"] + f["d5"]
    r9 = f["r13"] + f["d9"]
    r4 = r9 + f["d4"]
    r7 = f["r12"] + f["r14"] + f["d7"]
    r3 = r7 + f["d3"]
    r1 = r5 + f["r10"] + f["r13"] + f["r14"] + f["rth"]
    r2 = r4 + f["r8"] + f["r12"] + f["rpi"]
    rank_b = r2 + f["b_extra"]
    m = rank_b + r1 + f["m_rest"]
    q = rank_b + f["q_rest"]
    s = r3 + r4 + r5 + f["s_rest"]
    t = (f["r11"] + f["r10"] + f["r13"] + f["d9"] + f["r12"] + f["r14"] + f["d7"] + f["r8"]
         + f["r6"] + f["t_rest"])
    p = (f["r11"] + f["d5"] + f["r10"] + 2 * f["r13"] + 2 * f["r14"] + f["rth"] + f["d9"] + f["d4"]
         + f["r8"] + 2 * f["r12"] + f["rpi"] + f["d7"] + f["d3"] + f["r6"] + f["p_rest"])
    return canon.QuaternityInvariants(
        r1, r2, r3, r4, r5, f["r6"], r7, f["r8"], r9, f["r10"], f["r11"], f["r12"], f["r13"], f["r14"],
        f["rth"], f["rpi"], rank_b, (m, p, q, s, t),
    )


def gen_planted_quaternity(ring: RingDescriptor, max_dim: int, rng: random.Random):
    """Canonical form with chosen block sizes, scrambled by random nonsingular transforms.

    Returns ``(planted_invariants, (A, B, C, D))``; the invariants are known
    without evaluating any rank formula, so they serve as ground truth.
    """
    free = {k: (rng.randint(0, 2) if rng.random() < 0.4 else 0) for k in _PLANT_FREE}
    inv = _planted_sizes(free)
    while max(inv.dims) > max_dim:
        k = rng.choice([k for k, v in free.items() if v > 0])
        free[k] -= 1
        inv = _planted_sizes(free)
    cq = canon.build_canonical_quaternity(inv, ring)
    m, p, q, s, t = inv.dims
    U, V, W, X, Y = (gen_nonsingular(ring, n, rng) for n in (m, p, q, s, t))
    return inv, (U @ cq.S_a @ V, U @ cq.S_b @ W, X @ cq.S_c @ V, Y @ cq.S_d @ V)


# -- system instances -------------------------------------------------------------

# coefficient shapes in terms of named sizes
_SHAPES: dict[SystemKind, dict[str, tuple[str, str]]] = {
    SystemKind.TWO_UNKNOWN: {"A": ("m", "p"), "B": ("m", "q"), "C": ("s", "p"), "D": ("t", "p"),
                             "E": ("p1", "n"), "F": ("p1", "f"), "G": ("p1", "g"), "H": ("q1", "n")},
    SystemKind.CLASSICAL_TRIPLE: {"A": ("m", "p"), "C": ("s", "p"), "D": ("t", "p"),
                                  "E": ("p1", "n"), "F": ("p1", "f"), "G": ("p1", "g")},
    SystemKind.HERMITIAN_3_4: {"A": ("m", "p"), "B": ("m", "q"), "C": ("s", "p"), "D": ("t", "p")},
    SystemKind.HERMITIAN_3_5: {"A": ("m", "p"), "B": ("m", "q"), "C": ("s", "p"), "D": ("p", "t")},
}
_SHAPES[SystemKind.THREE_UNKNOWN] = _SHAPES[SystemKind.TWO_UNKNOWN]
_SHAPES[SystemKind.HERMITIAN_3_7] = _SHAPES[SystemKind.HERMITIAN_3_4]
_SHAPES[SystemKind.HERMITIAN_3_8] = _SHAPES[SystemKind.HERMITIAN_3_5]


def gen_dims(kind: SystemKind, max_dim: int, rng: random.Random) -> dict[str, int]:
    names = sorted({n for shape in _SHAPES[SystemKind(kind)].values() for n in shape})
    return {n: rng.randint(1 if n in ("m", "p") else 0, max(max_dim, 1)) for n in names}


def _hermitian_sample(ring: RingDescriptor, n: int, rng: random.Random) -> Matrix:
    R = gen_matrix(ring, n, n, rng)
    return R + conjugate_transpose(R)


def _rhs_shapes(kind: SystemKind, coeffs: dict[str, Matrix], unknowns: dict[str, tuple[int, int]]):
    out = {}
    for eq in EQUATIONS[kind]:
        t = eq.terms[0]
        r, c = unknowns[t.unknown]
        if t.star:
            r, c = c, r
        rows = _token(coeffs, t.left).rows if t.left else r
        cols = _token(coeffs, t.right).cols if t.right else c
        out[eq.rhs] = (rows, cols)
    return out


def gen_solvable_instance(kind: SystemKind | str, ring: RingDescriptor, dims: dict[str, int] | int,
                          rng: random.Random, unknowns: dict[str, Matrix] | None = None
                          ) -> tuple[SystemInstance, dict[str, Matrix]]:
    """Sample coefficients and unknowns, then set each right-hand side by substitution.

    Returns the instance together with the planted unknowns. Hermitian kinds
    draw Hermitian unknowns where the system requires them.
    """
    kind = SystemKind(kind)
    if kind in HERMITIAN_KINDS and ring.characteristic == 2:
        raise CharacteristicTwo(f"{kind.value} needs characteristic other than 2")
    if isinstance(dims, int):
        dims = gen_dims(kind, dims, rng)
    coeffs = {name: _gen_coeff(ring, dims[r], dims[c], rng) for name, (r, c) in _SHAPES[kind].items()}
    # placeholder right-hand sides only fix shapes for unknown_shapes
    probe = {n: Matrix.zeros(ring, 0, 0) for n in INPUTS[kind] if n not in coeffs}
    shapes = _unknown_shapes_raw(kind, {**coeffs, **probe})
    if unknowns is None:
        unknowns = _sample_unknowns(kind, ring, shapes, rng)
    mats = dict(coeffs)
    for rhs, (rows, cols) in _rhs_shapes(kind, coeffs, shapes).items():
        mats[rhs] = Matrix.zeros(ring, rows, cols)
    for eq in EQUATIONS[kind]:
        mats[eq.rhs] = _evaluate(mats, eq, unknowns)
    return SystemInstance(kind, ring, mats), unknowns


def _sample_unknowns(kind: SystemKind, ring: RingDescriptor, shapes, rng: random.Random) -> dict[str, Matrix]:
    herm = HERMITIAN_UNKNOWNS.get(kind, ())
    out = {}
    for name, (r, c) in shapes.items():
        if name in herm:
            out[name] = _hermitian_sample(ring, r, rng)
        elif rng.random() < 0.3:
            out[name] = gen_low_rank(ring, r, c, rng)
        else:
            out[name] = gen_matrix(ring, r, c, rng)
    return out


def _unknown_shapes_raw(kind: SystemKind, m: dict[str, Matrix]) -> dict[str, tuple[int, int]]:
    A = m["A"]
    if kind in (SystemKind.TWO_UNKNOWN, SystemKind.THREE_UNKNOWN, SystemKind.CLASSICAL_TRIPLE):
        out = {"X": (A.cols, m["E"].rows)}
        if kind is SystemKind.TWO_UNKNOWN:
            out["Y"] = (m["B"].cols, m["H"].rows)
        elif kind is SystemKind.THREE_UNKNOWN:
            out["Y"] = (m["B"].cols, m["E"].cols)
            out["Z"] = (A.rows, m["H"].rows)
        return out
    if kind in (SystemKind.HERMITIAN_3_4, SystemKind.HERMITIAN_3_5):
        return {"X": (A.cols, A.cols), "Y": (m["B"].cols, m["B"].cols)}
    return {"X": (A.cols, A.cols), "Y": (m["B"].cols, A.rows)}


def _perturb(inst: SystemInstance, rng: random.Random) -> SystemInstance:
    """Change one right-hand-side entry, keeping Hermitian right-hand sides Hermitian."""
    ring = inst.ring
    names = [eq.rhs for eq in EQUATIONS[inst.kind] if inst[eq.rhs].rows and inst[eq.rhs].cols]
    if not names:
        return inst
    name = rng.choice(names)
    M = inst[name]
    i, j = rng.randrange(M.rows), rng.randrange(M.cols)
    delta = gen_element(ring, rng)
    while ring.is_zero(delta):
        delta = gen_element(ring, rng)
    herm = name in _hermitian_rhs(inst.kind)
    if herm and i == j:
        delta = ring.add(delta, ring.conj(delta))
        if ring.is_zero(delta):
            delta = ring.one
    data = [list(r) for r in M.data]
    data[i][j] = ring.add(data[i][j], delta)
    if herm and i != j:
        data[j][i] = ring.add(data[j][i], ring.conj(delta))
    mats = dict(inst.matrices)
    mats[name] = Matrix._raw(ring, tuple(map(tuple, data)), M.rows, M.cols)
    return SystemInstance(inst.kind, ring, mats)


def _hermitian_rhs(kind: SystemKind) -> tuple[str, ...]:
    from .sylvester import HERMITIAN_RHS
    return HERMITIAN_RHS.get(kind, ())


def _decouple(inst: SystemInstance, rng: random.Random) -> SystemInstance:
    """Give every equation after the first its own fresh unknowns.

    Each equation stays solvable on its own, so only the conditions that couple
    the equations can detect the inconsistency.
    """
    shapes = unknown_shapes(inst)
    mats = dict(inst.matrices)
    for eq in EQUATIONS[inst.kind][1:]:
        mats[eq.rhs] = _evaluate(mats, eq, _sample_unknowns(inst.kind, inst.ring, shapes, rng))
    return SystemInstance(inst.kind, inst.ring, mats)


def gen_random_instance(kind: SystemKind | str, ring: RingDescriptor, max_dim: int,
                        rng: random.Random) -> SystemInstance:
    """Solvable, one-entry perturbed, or decoupled instances in proportions 2:1:1."""
    inst, _ = gen_solvable_instance(kind, ring, max_dim, rng)
    u = rng.random()
    if u < 0.25:
        inst = _perturb(inst, rng)
    elif u < 0.5:
        inst = _decouple(inst, rng)
    return inst


# -- brute force ------------------------------------------------------------------

EXHAUSTIVE_MAX_ENTRIES = 16
EXHAUSTIVE_MAX_P = 3


def _free_positions(inst: SystemInstance):
    herm = HERMITIAN_UNKNOWNS.get(inst.kind, ())
    pos = []
    for name, (r, c) in unknown_shapes(inst).items():
        for i in range(r):
            for j in range(c):
                if name in herm and j < i:
                    continue
                pos.append((name, i, j))
    return pos


def exhaustive_entry_count(inst: SystemInstance) -> int:
    return len(_free_positions(inst))


def exhaustive_solvability(inst: SystemInstance, chunk: int = 1 << 15) -> bool:
    """Try every assignment of the unknowns over GF(p), p <= 3.

    Hermitian unknowns are enumerated through their upper triangle (the
    involution is the identity on a prime field, so Hermitian means symmetric).
    """
    ring = inst.ring
    if ring.kind is not RingKind.PRIME_FIELD:
        raise TooLarge("exhaustive enumeration needs a prime field")
    p = ring.modulus
    if p > EXHAUSTIVE_MAX_P:
        raise TooLarge(f"exhaustive enumeration is capped at p <= {EXHAUSTIVE_MAX_P}, got {p}")
    if inst.kind in HERMITIAN_KINDS and p == 2:
        raise CharacteristicTwo(f"{inst.kind.value} needs characteristic other than 2")
    pos = _free_positions(inst)
    n = len(pos)
    if n > EXHAUSTIVE_MAX_ENTRIES:
        raise TooLarge(f"{n} unknown entries exceed the cap of {EXHAUSTIVE_MAX_ENTRIES}")
    shapes = unknown_shapes(inst)
    herm = HERMITIAN_UNKNOWNS.get(inst.kind, ())
    arr = lambda M: np.array(M.data, dtype=np.int64).reshape(M.rows, M.cols)  # noqa: E731
    eqs = []
    for eq in EQUATIONS[inst.kind]:
        terms = [(None if t.left is None else arr(_token(inst.matrices, t.left)), t.unknown,
                  None if t.right is None else arr(_token(inst.matrices, t.right)), t.star) for t in eq.terms]
        eqs.append((terms, arr(inst[eq.rhs])))
    total = p ** n
    powers = p ** np.arange(n, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % p
        N = len(idx)
        vals = {name: np.zeros((N, r, c), dtype=np.int64) for name, (r, c) in shapes.items()}
        for k, (name, i, j) in enumerate(pos):
            vals[name][:, i, j] = digits[:, k]
            if name in herm and i != j:
                vals[name][:, j, i] = digits[:, k]
        ok = np.ones(N, dtype=bool)
        for terms, target in eqs:
            acc = np.zeros((N,) + target.shape, dtype=np.int64)
            for L, name, R, star in terms:
                v = vals[name]
                if star:
                    v = np.swapaxes(v, 1, 2)
                if L is not None:
                    v = np.matmul(L, v) % p
                if R is not None:
                    v = np.matmul(v, R) % p
                acc = acc + v
            ok &= ((acc % p) == target[None]).reshape(N, -1).all(axis=1)
            if not ok.any():
                break
        if ok.any():
            return True
    return False


# -- campaigns --------------------------------------------------------------------

QUATERNITY_CHECKS = ("consistency", "invariance", "decomposition")
SOLVABILITY_CHECKS = tuple(k.value for k in SystemKind)
NECESSITY_CHECKS = tuple(f"necessity:{k.value}" for k in SystemKind)
ALL_CHECKS = QUATERNITY_CHECKS + SOLVABILITY_CHECKS + NECESSITY_CHECKS


@dataclass(frozen=True)
class CampaignConfig:
    seed: int
    rings: tuple[str, ...] = ("GF(2)", "GF(3)", "GF(7)", "QQ", "HQ")
    max_dim: int = 4
    ring_max_dim: dict[str, int] = field(default_factory=dict)
    instance_count: int = 20
    checks: tuple[str, ...] = QUATERNITY_CHECKS
    out_dir: str | None = None
    exhaustive_budget: int = 1 << 16
    workers: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.instance_count, int) or self.instance_count < 1:
            raise ValueError("instance_count must be a positive integer")
        if self.max_dim < 0 or any(v < 0 for v in self.ring_max_dim.values()):
            raise ValueError("dimension bounds must be nonnegative")
        object.__setattr__(self, "rings", tuple(self.rings))
        object.__setattr__(self, "checks", tuple(self.checks))
        for c in self.checks:
            if c not in ALL_CHECKS:
                raise ValueError(f"unknown check {c!r}")
        for r in self.rings:
            RingDescriptor.from_label(r)

    def bound(self, ring_label: str) -> int:
        return self.ring_max_dim.get(ring_label, self.max_dim)

    def to_json(self) -> dict:
        d = asdict(self)
        d["rings"] = list(self.rings)
        d["checks"] = list(self.checks)
        d.pop("workers")
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown config fields {sorted(extra)}")
        if "seed" not in obj:
            raise ValueError("config field 'seed' is required")
        return cls(**obj)


@dataclass
class CampaignReport:
    config: CampaignConfig
    tallies: dict[str, dict[str, dict[str, int]]]
    counterexamples: list[str]
    exhaustive: dict[str, dict[str, dict[str, int]]]
    facets: dict[str, dict[str, dict[str, int]]] = field(default_factory=dict)
    duration_s: float = 0.0

    @property
    def failures(self) -> int:
        return sum(t["fail"] for per in self.tallies.values() for t in per.values())

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "config": self.config.to_json(),
            "tallies": self.tallies,
            "counterexamples": self.counterexamples,
            "exhaustive": self.exhaustive,
            "facet_failures": self.facets,
            "failures": self.failures,
            "passed": self.passed,
        }
        if include_timing:
            out["duration_s"] = round(self.duration_s, 3)
        return out

    def dumps(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_json(include_timing), sort_keys=True, indent=1)


def _rng(seed: int, check_name: str, ring_label: str, index: int) -> random.Random:
    return random.Random(f"{seed}:{check_name}:{ring_label}:{index}")


def _quaternity_json(A, B, C, D) -> dict:
    return {"A": A.to_json(), "B": B.to_json(), "C": C.to_json(), "D": D.to_json()}


def _load_quaternity(obj: dict):
    return tuple(Matrix.from_json(obj[k], where=k) for k in "ABCD")


def _run_consistency(A, B, C, D, rng) -> dict:
    inv = canon.quaternity_invariants(A, B, C, D)
    rep = canon.verify_consistency(A, B, C, D, inv)
    dual = canon.duality_transport(A, B, C, D)
    facets = {"identities": all(c.holds for c in rep.checks),
              "nonnegative": not rep.negatives and not dual.negatives()}
    return {"ok": all(facets.values()), "facets": facets, "invariants": inv.to_json(),
            "identities": rep.to_json(), "dual_invariants": dual.to_json()}


def _run_invariance(A, B, C, D, rng) -> dict:
    ring = A.ring
    m, p = A.shape
    U, V, W, X, Y = (gen_nonsingular(ring, n, rng) for n in (m, p, B.cols, C.rows, D.rows))
    before = canon.quaternity_invariants(A, B, C, D)
    after = canon.quaternity_invariants(U @ A @ V, U @ B @ W, X @ C @ V, Y @ D @ V)
    return {"ok": before == after, "before": before.to_json(), "after": after.to_json(),
            "transforms": {k: M.to_json() for k, M in zip("UVWXY", (U, V, W, X, Y))}}


def _run_decomposition(A, B, C, D, rng) -> dict:
    cert = canon.decompose_quaternity(A, B, C, D)
    ok = cert.verify(A, B, C, D)
    for M in (cert.M, cert.P, cert.Q, cert.S, cert.T):
        invert_matrix(M)
    ct = conjugate_transpose
    E, F, G, H = ct(A), ct(C), ct(D), ct(B)
    dual = canon.decompose_dual(E, F, G, H)
    ok = ok and dual.verify(E, F, G, H)
    for M in (dual.P1, dual.M1, dual.Q1, dual.S1, dual.T1):
        invert_matrix(M)
    return {"ok": ok}


_QUATERNITY_RUNNERS: dict[str, Callable] = {
    "consistency": _run_consistency,
    "invariance": _run_invariance,
    "decomposition": _run_decomposition,
}


def _run_solvability(inst: SystemInstance, budget: int) -> dict:
    rec = cross_check(inst)
    out = {"ok": rec.agree, "facets": {"oracle_agreement": rec.agree}, "record": rec.to_json()}
    ring = inst.ring
    if (ring.kind is RingKind.PRIME_FIELD and ring.modulus <= EXHAUSTIVE_MAX_P
            and not (inst.kind in HERMITIAN_KINDS and ring.modulus == 2)):
        n = exhaustive_entry_count(inst)
        if n <= EXHAUSTIVE_MAX_ENTRIES:
            if ring.modulus ** n <= budget:
                truth = exhaustive_solvability(inst)
                out["exhaustive"] = truth
                agree = truth == rec.checker_verdict and truth == rec.oracle_feasible
                out["facets"]["exhaustive_agreement"] = agree
                out["ok"] = out["ok"] and agree
            else:
                out["exhaustive_skipped"] = True
    return out


def _run_necessity(inst: SystemInstance) -> dict:
    rep = check(inst)
    sol = solve_linearized(inst)
    herm_ok = all(sol.hermitian_flags[k] for k in HERMITIAN_UNKNOWNS.get(inst.kind, ()))
    return {"ok": rep.verdict and herm_ok, "facets": {"verdict": rep.verdict, "hermitian_witness": herm_ok},
            "failed_conditions": rep.failed(), "hermitian_flags": sol.hermitian_flags}


def _kind_applicable(kind: SystemKind, ring: RingDescriptor) -> bool:
    return not (kind in HERMITIAN_KINDS and ring.characteristic == 2)


def _one(task: tuple) -> tuple:
    """Run one (check, ring, index) cell; returns (payload for persistence, result)."""
    seed, check_name, ring_label, index, bound, budget = task
    ring = RingDescriptor.from_label(ring_label)
    rng = _rng(seed, check_name, ring_label, index)
    try:
        if check_name in _QUATERNITY_RUNNERS:
            A, B, C, D = gen_quaternity(ring, bound, rng)
            payload = {"quaternity": _quaternity_json(A, B, C, D)}
            result = _QUATERNITY_RUNNERS[check_name](A, B, C, D, rng)
        elif check_name.startswith("necessity:"):
            kind = SystemKind(check_name.split(":", 1)[1])
            inst, _ = gen_solvable_instance(kind, ring, bound, rng)
            payload = {"instance": inst.to_json()}
            result = _run_necessity(inst)
        else:
            inst = gen_random_instance(SystemKind(check_name), ring, bound, rng)
            payload = {"instance": inst.to_json()}
            result = _run_solvability(inst, budget)
    except QuaternityError as exc:
        payload = locals().get("payload", {})
        result = {"ok": False, "error": f"{type(exc).__name__}: {exc}"}
    return payload, result


def _replay_payload(check_name: str, payload: dict, seed: int, ring_label: str, index: int,
                    bound: int, budget: int) -> dict:
    rng = _rng(seed, check_name, ring_label, index)
    try:
        if check_name in _QUATERNITY_RUNNERS:
            A, B, C, D = _load_quaternity(payload["quaternity"])
            # advance the stream past the instance draw so random transforms match the original run
            gen_quaternity(RingDescriptor.from_label(ring_label), bound, rng)
            return _QUATERNITY_RUNNERS[check_name](A, B, C, D, rng)
        inst = SystemInstance.from_json(payload["instance"])
        if check_name.startswith("necessity:"):
            return _run_necessity(inst)
        return _run_solvability(inst, budget)
    except QuaternityError as exc:
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}


def run_campaign(config: CampaignConfig) -> CampaignReport:
    t0 = time.perf_counter()
    tasks = []
    for check_name in config.checks:
        for ring_label in config.rings:
            ring = RingDescriptor.from_label(ring_label)
            kind_name = check_name.split(":", 1)[-1]
            if kind_name in SOLVABILITY_CHECKS and not _kind_applicable(SystemKind(kind_name), ring):
                continue
            for i in range(config.instance_count):
                tasks.append((config.seed, check_name, ring_label, i, config.bound(ring_label),
                              config.exhaustive_budget))
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_one, tasks, chunksize=8))
    else:
        results = [_one(t) for t in tasks]

    tallies: dict[str, dict[str, dict[str, int]]] = {}
    exhaustive: dict[str, dict[str, dict[str, int]]] = {}
    facets: dict[str, dict[str, dict[str, int]]] = {}
    counterexamples: list[str] = []
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
    for task, (payload, result) in zip(tasks, results):
        seed, check_name, ring_label, index = task[:4]
        cell = tallies.setdefault(check_name, {}).setdefault(ring_label, {"pass": 0, "fail": 0})
        cell["pass" if result["ok"] else "fail"] += 1
        for facet, good in result.get("facets", {}).items():
            fc = facets.setdefault(check_name, {}).setdefault(ring_label, {})
            fc[facet] = fc.get(facet, 0) + (not good)
        if "exhaustive" in result or "exhaustive_skipped" in result:
            ex = exhaustive.setdefault(check_name, {}).setdefault(
                ring_label, {"compared": 0, "solvable": 0, "over_budget": 0})
            if "exhaustive" in result:
                ex["compared"] += 1
                ex["solvable"] += int(result["exhaustive"])
            else:
                ex["over_budget"] += 1
        if not result["ok"]:
            name = f"{seed}_{check_name.replace(':', '-')}_{ring_label}_{index}.json"
            if config.out_dir:
                path = os.path.join(config.out_dir, name)
                record = {"seed": seed, "check": check_name, "ring": ring_label, "index": index,
                          "bound": task[4], "exhaustive_budget": task[5], "payload": payload, "result": result}
                with open(path, "w") as fh:
                    json.dump(record, fh, sort_keys=True, indent=1)
                counterexamples.append(path)
            else:
                counterexamples.append(name)
    return CampaignReport(config, tallies, counterexamples, exhaustive, facets, time.perf_counter() - t0)


def replay(path: str) -> dict:
    """Re-run a persisted counterexample; returns the fresh result."""
    with open(path) as fh:
        rec = json.load(fh)
    return _replay_payload(rec["check"], rec["payload"], rec["seed"], rec["ring"], rec["index"],
                           rec["bound"], rec["exhaustive_budget"])
