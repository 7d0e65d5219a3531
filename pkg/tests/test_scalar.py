from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quaternity import GF, HQ, QQ, Element, ZeroInverse, conjugate, invert, regular_representation
from quaternity.scalar import RingDescriptor, is_prime, right_representation

from conftest import RINGS, RING_IDS, payloads


def q(w, x=0, y=0, z=0):
    return Element.of(HQ, [w, x, y, z])


I, J, K, ONE = q(0, 1), q(0, 0, 1), q(0, 0, 0, 1), q(1)


def test_inverse_examples():
    assert invert(Element.of(QQ, "3/4")) == Element.of(QQ, "4/3")
    assert invert(Element.of(GF(7), 3)) == Element.of(GF(7), 5)
    assert invert(I) == q(0, -1)
    a = q(1, 1, 1, 1)
    b = invert(a)
    assert b == Element.of(HQ, ["1/4", "-1/4", "-1/4", "-1/4"])
    assert a * b == ONE and b * a == ONE


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
def test_zero_has_no_inverse(ring):
    with pytest.raises(ZeroInverse):
        invert(Element(ring, ring.zero))


def test_conjugate_examples():
    assert conjugate(Element.of(QQ, "5/2")) == Element.of(QQ, "5/2")
    assert conjugate(q(1, 1, 1, 1)) == q(1, -1, -1, -1)
    assert conjugate(I * J) == conjugate(K) == q(0, 0, 0, -1)
    assert conjugate(I * J) == conjugate(J) * conjugate(I)


def test_quaternion_table_is_noncommutative():
    assert I * J == K and J * I == -K
    assert I * I == J * J == K * K == -ONE


def _rep_mul(a, b):
    return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(4)) for j in range(4)) for i in range(4))


def test_regular_representation_examples():
    assert regular_representation(Element.of(QQ, 3)) == ((Fraction(3),),)
    ri = regular_representation(I)
    cols = [tuple(ri[r][c] for r in range(4)) for c in range(4)]
    # 1 -> i, i -> -1, j -> k, k -> -j
    assert cols == [(0, 1, 0, 0), (-1, 0, 0, 0), (0, 0, 0, 1), (0, 0, -1, 0)]
    assert _rep_mul(regular_representation(I), regular_representation(J)) == regular_representation(K)


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_ring_axioms(ring, data):
    a, b, c = (Element(ring, data.draw(payloads(ring))) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c
    assert a + (-a) == Element(ring, ring.zero)
    if not a.is_zero():
        one = Element(ring, ring.one)
        assert invert(a) * a == one and a * invert(a) == one


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_involution_laws(ring, data):
    a, b = (Element(ring, data.draw(payloads(ring))) for _ in range(2))
    assert conjugate(a * b) == conjugate(b) * conjugate(a)
    assert conjugate(a + b) == conjugate(a) + conjugate(b)
    assert conjugate(conjugate(a)) == a


@pytest.mark.parametrize("ring", RINGS, ids=RING_IDS)
@given(data=st.data())
def test_text_round_trip(ring, data):
    a = data.draw(payloads(ring))
    assert ring.parse(ring.encode(a)) == ring.coerce(a)


@given(a=payloads(HQ), b=payloads(HQ))
def test_representation_is_a_faithful_homomorphism(a, b):
    ra, rb = regular_representation(a, HQ), regular_representation(b, HQ)
    assert regular_representation(HQ.mul(a, b), HQ) == _rep_mul(ra, rb)
    add = tuple(tuple(x + y for x, y in zip(u, v)) for u, v in zip(ra, rb))
    assert regular_representation(HQ.add(a, b), HQ) == add
    assert any(any(r) for r in ra) == (not HQ.is_zero(a))
    # right multiplication is an anti-homomorphism
    assert right_representation(HQ.mul(a, b), HQ) == _rep_mul(right_representation(b, HQ), right_representation(a, HQ))


def test_rationals_are_canonical():
    x = QQ.parse("-6/4")
    assert x == Fraction(-3, 2) and x.denominator > 0
    assert QQ.encode(Fraction(4, 2)) == "2"
    assert GF(7).parse(-1) == 6


@pytest.mark.parametrize("n", [0, 1, 4, 9, 91, 561, 2**61 + 1])
def test_composites_rejected(n):
    assert not is_prime(n)
    with pytest.raises(ValueError):
        GF(n)


@given(st.integers(2, 5000))
def test_primality_against_trial_division(n):
    assert is_prime(n) == all(n % d for d in range(2, int(n**0.5) + 1))


def test_ring_descriptor_json_and_labels():
    for r in RINGS:
        assert RingDescriptor.from_json(r.to_json()) == r
        assert RingDescriptor.from_label(r.label) == r
    assert GF(3).characteristic == 3 and QQ.characteristic == 0 and HQ.characteristic == 0
