import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from quaternity import GF, HQ, QQ, Matrix, ShapeMismatch, canon, conjugate_transpose, invert_matrix, rank
from quaternity.canon import (
    DUAL_RECIPES, QUATERNITY_RECIPES, _invariants_from_ranks, _RankBook, assemble,
    build_canonical_dual, build_canonical_quaternity, decompose_dual, decompose_quaternity,
    dual_invariants, duality_transport, identity_checks, quaternity_invariants, verify_consistency,
)
from quaternity.harness import gen_nonsingular, gen_planted_quaternity, gen_quaternity

from conftest import RINGS, RING_IDS
from oracles import sympy_rank

R_NAMES = [f"r{i}" for i in range(1, 15)] + ["r_theta", "r_pi"]


def zero_quaternity(ring, m, p, q, s, t):
    z = Matrix.zeros
    return z(ring, m, p), z(ring, m, q), z(ring, s, p), z(ring, t, p)


def eye_case(ring=QQ):
    return Matrix.identity(ring, 3), Matrix.zeros(ring, 3, 2), Matrix.zeros(ring, 1, 3), Matrix.zeros(ring, 1, 3)


# -- symbolic ---------------------------------------------------------------------

def test_all_eight_identities_hold_symbolically():
    syms = {k: sympy.Symbol(f"rank[{k}]") for k in QUATERNITY_RECIPES}
    v = _invariants_from_ranks(syms, (0, 0, 0, 0, 0))
    checks = identity_checks(v, syms)
    assert len(checks) == 8
    for c in checks:
        assert sympy.expand(c.lhs - c.rhs) == 0, c.name


def test_theta_and_pi_definitions():
    inv = quaternity_invariants(*gen_quaternity(GF(3), 5, random.Random(8)))
    assert inv.r_theta == inv.r1 - inv.r5 - inv.r10 - inv.r13 - inv.r14
    assert inv.r_pi == inv.r2 - inv.r4 - inv.r8 - inv.r12


# -- examples ---------------------------------------------------------------------

@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
def test_zero_quaternity(ring):
    A, B, C, D = zero_quaternity(ring, 2, 3, 1, 1, 1)
    inv = quaternity_invariants(A, B, C, D)
    assert all(v == 0 for k, v in inv.values().items())
    assert verify_consistency(A, B, C, D, inv).passed
    cq = build_canonical_quaternity(inv, ring)
    assert [M.shape for M in cq.matrices().values()] == [(2, 3), (2, 1), (1, 3), (1, 3)]
    assert all(M.is_zero() for M in cq.matrices().values())
    cert = decompose_quaternity(A, B, C, D)
    assert cert.verify(A, B, C, D)
    assert all(M == Matrix.identity(ring, M.rows) for M in (cert.M, cert.P, cert.Q, cert.S, cert.T))
    assert all(v == 0 for v in duality_transport(A, B, C, D).values().values())


def test_identity_a_case():
    A, B, C, D = eye_case()
    inv = quaternity_invariants(A, B, C, D)
    want = {k: 0 for k in R_NAMES}
    want.update(r1=3, r_theta=3)
    assert {k: inv.values()[k] for k in R_NAMES} == want
    rep = verify_consistency(A, B, C, D, inv)
    first_aux = next(c for c in rep.checks if c.name == "rank(AA;C0;0D)")
    assert first_aux.lhs == first_aux.rhs == 3
    cq = build_canonical_quaternity(inv)
    assert cq.S_a == Matrix.identity(QQ, 3)
    assert cq.S_b.is_zero() and cq.S_c.is_zero() and cq.S_d.is_zero()
    cert = decompose_quaternity(A, B, C, D)
    assert cert.M @ A @ cert.P == cq.S_a


def test_dual_examples():
    z = Matrix.zeros
    assert all(v == 0 for v in dual_invariants(z(QQ, 2, 2), z(QQ, 2, 1), z(QQ, 2, 1), z(QQ, 1, 2)).values().values())
    inv = dual_invariants(Matrix.identity(QQ, 2), z(QQ, 2, 1), z(QQ, 2, 1), z(QQ, 1, 2))
    # v5 = r(E F; H 0) - r(F) - r(H) = 2: the identity rows of S_e sit in the v5 row block of S_f
    assert {k: v for k, v in inv.values().items() if v} == {"v2": 2, "v5": 2}
    cd = build_canonical_dual(inv)
    assert cd.S_e == Matrix.identity(QQ, 2)
    assert cd.S_f.is_zero() and cd.S_g.is_zero() and cd.S_h.is_zero()
    A = Matrix.identity(QQ, 2)
    tr = duality_transport(A, z(QQ, 2, 1), z(QQ, 1, 2), z(QQ, 1, 2))
    assert tr.v2 == 2 == quaternity_invariants(A, z(QQ, 2, 1), z(QQ, 1, 2), z(QQ, 1, 2)).r1


def _oracle_book(recipes, mats):
    return _RankBook(recipes, mats, sympy_rank)


def test_seeded_gf3_invariants_match_independent_rank_oracle():
    rng = random.Random(2024)
    ring = GF(3)
    g = lambda r, c: Matrix(ring, [[rng.randrange(3) for _ in range(c)] for _ in range(r)])  # noqa: E731
    A, B, C, D = g(4, 4), g(4, 2), g(3, 4), g(3, 4)
    inv = quaternity_invariants(A, B, C, D)
    oracle = _invariants_from_ranks(_oracle_book(QUATERNITY_RECIPES, dict(A=A, B=B, C=C, D=D)), inv.dims)
    assert inv == oracle


def test_seeded_gf5_dual_invariants_match_independent_rank_oracle(monkeypatch):
    rng = random.Random(5)
    ring = GF(5)
    g = lambda r, c: Matrix(ring, [[rng.randrange(5) for _ in range(c)] for _ in range(r)])  # noqa: E731
    E, F, G, H = g(4, 3), g(4, 2), g(4, 3), g(2, 3)
    inv = dual_invariants(E, F, G, H)
    monkeypatch.setattr(canon, "_RankBook", lambda recipes, mats: _oracle_book(recipes, mats))
    assert dual_invariants(E, F, G, H) == inv


def test_transport_matches_rank_identities():
    A, B, C, D = gen_quaternity(GF(3), 5, random.Random(11))
    E, F, G, H = (conjugate_transpose(M) for M in (A, C, D, B))
    assert rank(E) == rank(A)
    assert rank(assemble(DUAL_RECIPES["E;H"], dict(E=E, H=H))) == rank(assemble("A B", dict(A=A, B=B)))
    assert duality_transport(A, B, C, D) == dual_invariants(E, F, G, H)


def test_shape_errors():
    A, B, C, D = eye_case()
    with pytest.raises(ShapeMismatch):
        quaternity_invariants(A, Matrix.zeros(QQ, 2, 2), C, D)
    with pytest.raises(ShapeMismatch):
        decompose_quaternity(A, B, Matrix.zeros(QQ, 1, 2), D)
    with pytest.raises(ShapeMismatch):
        quaternity_invariants(A, B, C, Matrix.zeros(GF(3), 1, 3))


# -- properties -------------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def _is_identity_layout(M):
    """0/1 entries with at most one 1 per column (S_d, S_a, ...) or per row (the transposed duals)."""
    one, zero = M.ring.one, M.ring.zero
    if any(x not in (zero, one) for r in M.data for x in r):
        return False
    per_row = all(sum(x == one for x in r) <= 1 for r in M.data)
    per_col = all(sum(r[j] == one for r in M.data) <= 1 for j in range(M.cols))
    return per_row or per_col


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(seed=seeds)
def test_planted_canonical_forms_are_recovered(ring, seed):
    planted, (A, B, C, D) = gen_planted_quaternity(ring, 6 if ring is not HQ else 4, random.Random(seed))
    assert quaternity_invariants(A, B, C, D) == planted


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(seed=seeds)
def test_random_quaternity_properties(ring, seed):
    rng = random.Random(seed)
    A, B, C, D = gen_quaternity(ring, 5 if ring is not HQ else 3, rng)
    inv = quaternity_invariants(A, B, C, D)
    rep = verify_consistency(A, B, C, D, inv)
    assert rep.passed, rep.to_json()
    assert not inv.negatives() and not duality_transport(A, B, C, D).negatives()

    cq = build_canonical_quaternity(inv, ring)
    m, p, q, s, t = inv.dims
    assert (len(cq.column_partition_p), sum(cq.column_partition_p)) == (18, p)
    assert (sum(cq.a_rows), sum(cq.c_rows), len(cq.d_rows), sum(cq.d_rows)) == (m, s, 10, t)
    assert all(_is_identity_layout(M) for M in cq.matrices().values())
    assert rank(cq.S_a) == inv.r1 + inv.r2 and rank(cq.S_b) == inv.rank_b
    assert rank(cq.S_c) == inv.r3 + inv.r4 + inv.r5
    assert rank(cq.S_d) == sympy_rank(cq.S_d) == rank(D)
    # idempotence on canonical forms
    assert quaternity_invariants(cq.S_a, cq.S_b, cq.S_c, cq.S_d) == inv

    U, V, W, X, Y = (gen_nonsingular(ring, n, rng) for n in (m, p, q, s, t))
    assert quaternity_invariants(U @ A @ V, U @ B @ W, X @ C @ V, Y @ D @ V) == inv


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(seed=seeds)
def test_decompositions_verify(ring, seed):
    A, B, C, D = gen_quaternity(ring, 4 if ring is not HQ else 3, random.Random(seed))
    cert = decompose_quaternity(A, B, C, D)
    assert cert.M @ A @ cert.P == cert.targets.S_a
    assert cert.M @ B @ cert.Q == cert.targets.S_b
    assert cert.S @ C @ cert.P == cert.targets.S_c
    assert cert.T @ D @ cert.P == cert.targets.S_d
    for M in (cert.M, cert.P, cert.Q, cert.S, cert.T):
        assert invert_matrix(M) @ M == Matrix.identity(ring, M.rows)
    assert cert.targets == build_canonical_quaternity(quaternity_invariants(A, B, C, D), ring)

    E, F, G, H = (conjugate_transpose(M) for M in (A, C, D, B))
    dual = decompose_dual(E, F, G, H)
    t = dual.targets
    assert dual.P1 @ E @ dual.M1 == t.S_e and dual.P1 @ F @ dual.S1 == t.S_f
    assert dual.P1 @ G @ dual.T1 == t.S_g and dual.Q1 @ H @ dual.M1 == t.S_h
    for M in (dual.P1, dual.M1, dual.Q1, dual.S1, dual.T1):
        invert_matrix(M)
    assert all(_is_identity_layout(M) for M in t.matrices().values())
    # dual canonical form is a fixed point too
    assert dual_invariants(t.S_e, t.S_f, t.S_g, t.S_h) == dual_invariants(E, F, G, H)


def test_invariants_json_round_trip():
    inv = quaternity_invariants(*gen_quaternity(QQ, 5, random.Random(3)))
    assert canon.QuaternityInvariants.from_json(inv.to_json()) == inv
    assert set(inv.to_json()) == set(R_NAMES) | {"rank_b", "dims"}
    dual = duality_transport(*gen_quaternity(QQ, 5, random.Random(3)))
    assert canon.DualInvariants.from_json(dual.to_json()) == dual
