import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quaternity import GF, HQ, QQ, Matrix, kernels, rank, row_reduce_tracked

from conftest import RINGS, RING_IDS, matrices
from oracles import sympy_rank

needs_compiled = pytest.mark.skipif(not kernels.COMPILED_AVAILABLE, reason="compiled kernels not built")


@needs_compiled
@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_backends_agree(ring, data):
    m = data.draw(matrices(ring, 6, 6))
    with kernels.using_backend("python"):
        slow = kernels.rank_rows(ring, m.data, m.cols)
        slow_rref = kernels.rref_rows(ring, m.data, m.cols)
    with kernels.using_backend("cython"):
        fast = kernels.rank_rows(ring, m.data, m.cols)
        fast_rref = kernels.rref_rows(ring, m.data, m.cols)
    assert slow == fast
    assert slow_rref == fast_rref


@needs_compiled
@pytest.mark.parametrize("ring", [QQ, HQ], ids=["QQ", "HQ"])
def test_overflow_falls_back_to_python(ring):
    big = 2**70 + 1
    if ring is QQ:
        m = Matrix(QQ, [[big, 1, 3], [Fraction(1, big), 2, 5], [7, big * 3, 1]])
    else:
        m = Matrix(HQ, [[[big, 1, 0, 2], [0, 0, 1, 0]], [[1, 0, big, 0], [3, 1, 4, 1]]])
    with kernels.using_backend("cython"):
        assert rank(Matrix(ring, m.data, cols=m.cols)) == sympy_rank(m)


def test_using_backend_restores_selection():
    before = kernels.backend()
    with kernels.using_backend("python"):
        assert kernels.backend() == "python"
    assert kernels.backend() == before
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_environment_variable_forces_python():
    env = dict(os.environ, QUATERNITY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from quaternity import kernels; print(kernels.backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_pure_python_rank_examples():
    with kernels.using_backend("python"):
        assert rank(Matrix.identity(GF(7), 4)) == 4
        tr = row_reduce_tracked(Matrix(QQ, [[2, 4], [1, 2]]))
        assert tr.pivot_columns == (0,)
