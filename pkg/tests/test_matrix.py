import pytest
from hypothesis import given
from hypothesis import strategies as st

from quaternity import (
    GF, HQ, IDENTITY, QQ, Matrix, ShapeMismatch, SingularMatrix, block, conjugate_transpose,
    invert_matrix, rank, row_reduce_tracked,
)
from quaternity.errors import Infeasible, ParseError
from quaternity.harness import gen_nonsingular
from quaternity.matrix import left_null_space, right_null_space, solve_left, solve_right

from conftest import RINGS, RING_IDS, matrices
from oracles import frac_rank, sympy_rank


def H(rows):
    return Matrix(HQ, rows)


i, j, k, one = [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]
neg = lambda e: [-x for x in e]  # noqa: E731


def test_rank_examples():
    assert rank(Matrix.identity(QQ, 3)) == 3
    assert rank(Matrix.zeros(GF(3), 2, 5)) == 0
    assert rank(H([[i], [j]])) == 1


def test_quaternion_2x2_ranks_agree_with_real_oracle():
    # (-j)*(i, j) = (k, 1), so [[i, j], [k, 1]] is rank one and [[i, j], [k, -1]] is not
    m_one = H([[i, j], [k, one]])
    m_two = H([[i, j], [k, neg(one)]])
    assert rank(m_one) == sympy_rank(m_one) == 1
    assert rank(m_two) == sympy_rank(m_two) == 2


def test_row_reduce_examples():
    n = 3
    tr = row_reduce_tracked(Matrix.identity(QQ, n))
    assert tr.reduced == tr.transform == Matrix.identity(QQ, n) and tr.pivot_columns == (0, 1, 2)
    z = Matrix.zeros(GF(5), 2, 3)
    tr = row_reduce_tracked(z)
    assert tr.reduced == z and tr.transform == Matrix.identity(GF(5), 2) and tr.pivot_columns == ()
    m = Matrix(QQ, [[2, 4], [1, 2]])
    tr = row_reduce_tracked(m)
    assert tr.reduced == Matrix(QQ, [[1, 2], [0, 0]]) and tr.pivot_columns == (0,)
    assert tr.transform @ m == tr.reduced


def test_block_examples():
    a = Matrix(QQ, [[1, 2], [3, 4]])
    assert block([[a]]) == a
    assert block([[Matrix.identity(QQ, 2), 0], [0, Matrix.identity(QQ, 3)]]) == Matrix.identity(QQ, 5)
    assert block([[Matrix.identity(QQ, 2), 0], [0, IDENTITY], [0, Matrix.zeros(QQ, 1, 3)]]).shape == (6, 5)


def test_block_six_by_five_matches_index_arithmetic():
    A = Matrix(QQ, [[1, 2], [3, 4]])
    B = Matrix(QQ, [[5], [6]])
    C = Matrix(QQ, [[7, 8]])
    D = Matrix(QQ, [[9, 10]])
    M = block([[0, A, B], [A, A, 0], [C, 0, 0], [0, D, 0]])
    assert M.shape == (6, 5)
    want = [[0] * 5 for _ in range(6)]
    for (r0, c0), X in {(0, 2): A, (0, 4): B, (2, 0): A, (2, 2): A, (4, 0): C, (5, 2): D}.items():
        for a in range(X.rows):
            for b in range(X.cols):
                want[r0 + a][c0 + b] = X.data[a][b]
    assert M == Matrix(QQ, want)


def test_block_errors_name_the_slot():
    a = Matrix(QQ, [[1, 2]])
    b = Matrix(QQ, [[1], [2]])
    with pytest.raises(ShapeMismatch, match=r"\(0,1\)"):
        block([[a, b]])
    with pytest.raises(ShapeMismatch, match=r"\(0,1\)"):
        block([[a, 0], [0, 0]])


def test_conjugate_transpose_and_inverse_examples():
    assert conjugate_transpose(H([[i, j]])) == H([[neg(i)], [neg(j)]])
    assert invert_matrix(Matrix.identity(HQ, 3)) == Matrix.identity(HQ, 3)
    with pytest.raises(SingularMatrix):
        invert_matrix(Matrix(QQ, [[1, 2], [2, 4]]))
    with pytest.raises(ShapeMismatch):
        invert_matrix(Matrix.zeros(QQ, 2, 3))


def test_zero_dimensional_matrices():
    e = Matrix.zeros(QQ, 0, 3)
    assert rank(e) == 0 and e.H.shape == (3, 0)
    assert (Matrix.zeros(QQ, 2, 0) @ e) == Matrix.zeros(QQ, 2, 3)
    assert block([[Matrix.identity(QQ, 2), Matrix.zeros(QQ, 2, 0)]]) == Matrix.identity(QQ, 2)


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_rank_matches_sympy(ring, data):
    m = data.draw(matrices(ring, 5, 5))
    assert rank(m) == sympy_rank(m)


@given(m=matrices(QQ, 6, 6))
def test_rank_matches_plain_fraction_elimination(m):
    assert rank(m) == frac_rank(m.data)


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_tracked_reduction_contract(ring, data):
    m = data.draw(matrices(ring, 5, 5))
    tr = row_reduce_tracked(m)
    assert tr.transform @ m == tr.reduced
    assert tr.rank == rank(m) == sum(1 for r in tr.reduced.data if any(not ring.is_zero(x) for x in r))
    for r, c in enumerate(tr.pivot_columns):
        assert tr.reduced.data[r][c] == ring.one
        assert all(ring.is_zero(x) for x in tr.reduced.data[r][:c])
    assert list(tr.pivot_columns) == sorted(tr.pivot_columns)
    invert_matrix(tr.transform)
    assert row_reduce_tracked(m) == tr


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_rank_invariant_under_nonsingular_transforms(ring, data):
    m = data.draw(matrices(ring, 4, 4))
    rng = data.draw(st.randoms(use_true_random=False))
    U, V = gen_nonsingular(ring, m.rows, rng), gen_nonsingular(ring, m.cols, rng)
    assert rank(U @ m @ V) == rank(m)


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_product_and_inverse_laws(ring, data):
    a = data.draw(matrices(ring, 3, 3))
    b = data.draw(matrices(ring, rows=a.cols, max_cols=3))
    assert (a @ b).H == b.H @ a.H
    assert a.H.H == a
    rng = data.draw(st.randoms(use_true_random=False))
    n = data.draw(st.integers(0, 4))
    g = gen_nonsingular(ring, n, rng)
    gi = invert_matrix(g)
    assert gi @ g == g @ gi == Matrix.identity(ring, n)


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_null_spaces_and_solvers(ring, data):
    m = data.draw(matrices(ring, 4, 4))
    L, R = left_null_space(m), right_null_space(m)
    assert L.rows == m.rows - rank(m) and R.cols == m.cols - rank(m)
    assert (L @ m).is_zero() and (m @ R).is_zero()
    x = data.draw(matrices(ring, rows=m.cols, cols=2))
    assert m @ solve_right(m, m @ x) == m @ x
    y = data.draw(matrices(ring, rows=2, cols=m.rows))
    assert solve_left(m, y @ m) @ m == y @ m


def test_solve_reports_infeasible():
    with pytest.raises(Infeasible):
        solve_right(Matrix(QQ, [[1, 0], [0, 0]]), Matrix(QQ, [[0], [1]]))


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_json_round_trip(ring, data):
    m = data.draw(matrices(ring, 3, 3))
    assert Matrix.loads(m.dumps()) == m


def test_json_errors_name_the_field():
    good = Matrix(QQ, [[1, 2]]).to_json()
    with pytest.raises(ShapeMismatch, match="data"):
        Matrix.from_json(dict(good, rows=2))
    with pytest.raises(ParseError, match=r"data\[0\]"):
        Matrix.from_json(dict(good, data=[["1", "x"]]))
    with pytest.raises(ParseError, match="'p'"):
        Matrix.from_json(dict(good, ring="prime_field", p=6))
