import os
import random
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from quaternity import GF, HQ, QQ, Matrix

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

RINGS = [GF(2), GF(3), GF(7), QQ, HQ]
RING_IDS = [r.label for r in RINGS]

small_q = st.builds(Fraction, st.integers(-3, 3), st.sampled_from([1, 2, 3]))


def payloads(ring):
    if ring.kind.value == "prime_field":
        return st.integers(0, ring.modulus - 1)
    if ring.kind.value == "rationals":
        return small_q
    return st.tuples(small_q, small_q, small_q, small_q)


@st.composite
def matrices(draw, ring, max_rows=4, max_cols=4, rows=None, cols=None):
    r = draw(st.integers(0, max_rows)) if rows is None else rows
    c = draw(st.integers(0, max_cols)) if cols is None else cols
    data = [[draw(payloads(ring)) for _ in range(c)] for _ in range(r)]
    return Matrix(ring, data, cols=c)


@pytest.fixture(params=RINGS, ids=RING_IDS)
def ring(request):
    return request.param


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "CRITERION_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
