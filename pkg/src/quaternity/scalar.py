"""Exact division rings with an involution: Q, GF(p) and the rational quaternions.

Ring elements are plain immutable payloads so the matrix layer can work on
them without wrapper overhead:

* rationals: ``fractions.Fraction``
* GF(p): ``int`` in ``[0, p)``
* quaternions: 4-tuple of ``Fraction`` ``(w, x, y, z)`` for ``w + xi + yj + zk``

:class:`Element` wraps a payload together with its ring for user-facing code.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, ClassVar

from .errors import ParseError, ZeroInverse

__all__ = [
    "RingKind",
    "RingDescriptor",
    "Element",
    "QQ",
    "HQ",
    "GF",
    "is_prime",
    "invert",
    "conjugate",
    "regular_representation",
    "right_representation",
    "quat_mul",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class RingKind(str, enum.Enum):
    RATIONALS = "rationals"
    PRIME_FIELD = "prime_field"
    RATIONAL_QUATERNIONS = "rational_quaternions"


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# -- quaternion payload arithmetic -------------------------------------------

def quat_mul(a: tuple, b: tuple) -> tuple:
    a1, b1, c1, d1 = a
    a2, b2, c2, d2 = b
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def _quat_inv(a: tuple) -> tuple:
    w, x, y, z = a
    n = w * w + x * x + y * y + z * z
    if n == 0:
        raise ZeroInverse("quaternion 0 has no inverse")
    return (w / n, -x / n, -y / n, -z / n)


def _to_fraction(tok: Any) -> Fraction:
    if isinstance(tok, bool) or isinstance(tok, float):
        raise ParseError(f"not an exact rational: {tok!r}")
    if isinstance(tok, (int, Fraction)):
        return Fraction(tok)
    if isinstance(tok, str):
        try:
            return Fraction(tok.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational {tok!r}") from exc
    raise ParseError(f"not a rational token: {tok!r}")


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- ring descriptor ----------------------------------------------------------

@dataclass(frozen=True)
class RingDescriptor:
    """Identifies a ring; payload arithmetic lives on the descriptor.

    The arithmetic callables (``add``, ``mul``, ``inv`` ...) are attached in
    ``__post_init__`` and are not dataclass fields, so equality and hashing only
    see ``kind`` and ``modulus``.
    """

    kind: RingKind
    modulus: int | None = None

    def __post_init__(self) -> None:
        kind = RingKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RingKind.PRIME_FIELD:
            if not isinstance(self.modulus, int) or not is_prime(self.modulus):
                raise ValueError(f"prime field modulus must be prime, got {self.modulus!r}")
        elif self.modulus is not None:
            raise ValueError("modulus is only meaningful for prime fields")
        _install_ops(self)

    # the attached callables, declared for type checkers
    zero: ClassVar[Any]
    one: ClassVar[Any]
    add: ClassVar[Callable[[Any, Any], Any]]
    sub: ClassVar[Callable[[Any, Any], Any]]
    neg: ClassVar[Callable[[Any], Any]]
    mul: ClassVar[Callable[[Any, Any], Any]]
    conj: ClassVar[Callable[[Any], Any]]
    is_zero: ClassVar[Callable[[Any], bool]]

    @property
    def characteristic(self) -> int:
        return self.modulus if self.kind is RingKind.PRIME_FIELD else 0

    @property
    def is_commutative(self) -> bool:
        return self.kind is not RingKind.RATIONAL_QUATERNIONS

    @property
    def base_dim(self) -> int:
        """Dimension of the ring over its base field."""
        return 4 if self.kind is RingKind.RATIONAL_QUATERNIONS else 1

    @property
    def base(self) -> "RingDescriptor":
        return QQ if self.kind is RingKind.RATIONAL_QUATERNIONS else self

    @property
    def label(self) -> str:
        if self.kind is RingKind.PRIME_FIELD:
            return f"GF({self.modulus})"
        return "QQ" if self.kind is RingKind.RATIONALS else "HQ"

    def __repr__(self) -> str:
        return f"RingDescriptor({self.label})"

    def inv(self, a: Any) -> Any:
        if self.is_zero(a):
            raise ZeroInverse(f"zero has no inverse in {self.label}")
        return self._inv(a)

    def from_int(self, n: int) -> Any:
        if self.kind is RingKind.PRIME_FIELD:
            return n % self.modulus
        if self.kind is RingKind.RATIONALS:
            return Fraction(n)
        return (Fraction(n), _ZERO, _ZERO, _ZERO)

    def coerce(self, x: Any) -> Any:
        """Turn ints, Fractions, strings, 4-sequences or Elements into a payload."""
        if isinstance(x, Element):
            if x.ring != self:
                raise ParseError(f"element of {x.ring.label} used in {self.label}")
            return x.value
        return self.parse(x)

    def parse(self, tok: Any) -> Any:
        """Decode one entry of the JSON interchange format."""
        if self.kind is RingKind.PRIME_FIELD:
            if isinstance(tok, bool) or isinstance(tok, float):
                raise ParseError(f"not a residue: {tok!r}")
            if isinstance(tok, str):
                try:
                    tok = int(tok.strip())
                except ValueError as exc:
                    raise ParseError(f"bad residue {tok!r}") from exc
            if isinstance(tok, Fraction):
                if tok.denominator != 1:
                    raise ParseError(f"not a residue: {tok!r}")
                tok = tok.numerator
            if not isinstance(tok, int):
                raise ParseError(f"not a residue: {tok!r}")
            return tok % self.modulus
        if self.kind is RingKind.RATIONALS:
            return _to_fraction(tok)
        if isinstance(tok, (list, tuple)):
            if len(tok) != 4:
                raise ParseError(f"quaternion needs 4 components, got {len(tok)}")
            return tuple(_to_fraction(c) for c in tok)
        # a bare rational is accepted as a real quaternion
        return (_to_fraction(tok), _ZERO, _ZERO, _ZERO)

    def encode(self, a: Any) -> Any:
        """Encode a payload as a JSON value (canonical, round-trips through parse)."""
        if self.kind is RingKind.PRIME_FIELD:
            return int(a)
        if self.kind is RingKind.RATIONALS:
            return _fmt_fraction(a)
        return [_fmt_fraction(c) for c in a]

    def format(self, a: Any) -> str:
        if self.kind is RingKind.RATIONAL_QUATERNIONS:
            return "[" + ",".join(_fmt_fraction(c) for c in a) + "]"
        return str(self.encode(a))

    def coords(self, a: Any) -> tuple:
        """Coordinates over the base field (basis 1, i, j, k for quaternions)."""
        return a if self.kind is RingKind.RATIONAL_QUATERNIONS else (a,)

    def from_coords(self, cs: tuple) -> Any:
        return tuple(cs) if self.kind is RingKind.RATIONAL_QUATERNIONS else cs[0]

    def to_json(self) -> dict:
        return {"ring": self.kind.value, "p": self.modulus}

    @classmethod
    def from_json(cls, obj: dict) -> "RingDescriptor":
        try:
            kind = RingKind(obj["ring"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"field 'ring': unknown or missing ring {obj.get('ring')!r}") from exc
        if kind is RingKind.PRIME_FIELD:
            p = obj.get("p")
            if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
                raise ParseError(f"field 'p': prime modulus required, got {p!r}")
            return cls(kind, p)
        return cls(kind)

    @classmethod
    def from_label(cls, label: str, p: int | None = None) -> "RingDescriptor":
        """Accepts 'QQ', 'HQ', 'GF(7)', 'GF7' or the kind names."""
        s = label.strip()
        low = s.lower()
        if low in ("qq", "q", "rationals"):
            return QQ
        if low in ("hq", "h", "quaternions", "rational_quaternions"):
            return HQ
        if low in ("gf", "prime_field") and p is not None:
            return GF(p)
        if low.startswith("gf"):
            digits = low[2:].strip("()")
            if digits.isdigit():
                return GF(int(digits))
        raise ParseError(f"unknown ring label {label!r}")


def _install_ops(r: RingDescriptor) -> None:
    put = lambda name, fn: object.__setattr__(r, name, fn)  # noqa: E731
    if r.kind is RingKind.PRIME_FIELD:
        p = r.modulus
        put("zero", 0)
        put("one", 1 % p)
        put("add", lambda a, b: (a + b) % p)
        put("sub", lambda a, b: (a - b) % p)
        put("neg", lambda a: (-a) % p)
        put("mul", lambda a, b: a * b % p)
        put("_inv", lambda a: pow(a, p - 2, p))
        put("conj", lambda a: a)
        put("is_zero", lambda a: a == 0)
    elif r.kind is RingKind.RATIONALS:
        put("zero", _ZERO)
        put("one", _ONE)
        put("add", lambda a, b: a + b)
        put("sub", lambda a, b: a - b)
        put("neg", lambda a: -a)
        put("mul", lambda a, b: a * b)
        put("_inv", lambda a: 1 / a)
        put("conj", lambda a: a)
        put("is_zero", lambda a: a == 0)
    else:
        put("zero", (_ZERO, _ZERO, _ZERO, _ZERO))
        put("one", (_ONE, _ZERO, _ZERO, _ZERO))
        put("add", lambda a, b: (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]))
        put("sub", lambda a, b: (a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]))
        put("neg", lambda a: (-a[0], -a[1], -a[2], -a[3]))
        put("mul", quat_mul)
        put("_inv", _quat_inv)
        put("conj", lambda a: (a[0], -a[1], -a[2], -a[3]))
        put("is_zero", lambda a: not (a[0] or a[1] or a[2] or a[3]))


QQ = RingDescriptor(RingKind.RATIONALS)
HQ = RingDescriptor(RingKind.RATIONAL_QUATERNIONS)


def GF(p: int) -> RingDescriptor:
    return RingDescriptor(RingKind.PRIME_FIELD, p)


# -- elements -----------------------------------------------------------------

@dataclass(frozen=True)
class Element:
    """A ring element. Equality is structural on the canonical payload."""

    ring: RingDescriptor
    value: Any

    @classmethod
    def of(cls, ring: RingDescriptor, x: Any) -> "Element":
        return cls(ring, ring.coerce(x))

    def _other(self, other: Any) -> Any:
        if isinstance(other, Element):
            if other.ring != self.ring:
                raise TypeError(f"cannot mix {self.ring.label} and {other.ring.label}")
            return other.value
        return self.ring.coerce(other)

    def __add__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.add(self.value, self._other(other)))

    def __radd__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.add(self._other(other), self.value))

    def __sub__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.sub(self.value, self._other(other)))

    def __rsub__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.sub(self._other(other), self.value))

    def __mul__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.mul(self.value, self._other(other)))

    def __rmul__(self, other: Any) -> "Element":
        return Element(self.ring, self.ring.mul(self._other(other), self.value))

    def __neg__(self) -> "Element":
        return Element(self.ring, self.ring.neg(self.value))

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.value)

    def inverse(self) -> "Element":
        return invert(self)

    def conjugate(self) -> "Element":
        return conjugate(self)

    def encode(self) -> Any:
        return self.ring.encode(self.value)

    def __str__(self) -> str:
        return self.ring.format(self.value)


def invert(a: Element) -> Element:
    return Element(a.ring, a.ring.inv(a.value))


def conjugate(a: Element) -> Element:
    return Element(a.ring, a.ring.conj(a.value))


_BASIS = (
    (_ONE, _ZERO, _ZERO, _ZERO),
    (_ZERO, _ONE, _ZERO, _ZERO),
    (_ZERO, _ZERO, _ONE, _ZERO),
    (_ZERO, _ZERO, _ZERO, _ONE),
)


def _rep(ring: RingDescriptor, value: Any, left: bool) -> tuple:
    if ring.kind is not RingKind.RATIONAL_QUATERNIONS:
        return ((value,),)
    cols = [quat_mul(value, e) if left else quat_mul(e, value) for e in _BASIS]
    return tuple(tuple(cols[c][r] for c in range(4)) for r in range(4))


def regular_representation(a: Element | Any, ring: RingDescriptor | None = None) -> tuple:
    """Matrix of x -> a*x over the base field, as a tuple of rows.

    Column c holds the coordinates of ``a * e_c`` in the basis (1, i, j, k).
    Accepts an Element, or a raw payload together with its ring.
    """
    if isinstance(a, Element):
        return _rep(a.ring, a.value, True)
    return _rep(ring, a, True)


def right_representation(a: Element | Any, ring: RingDescriptor | None = None) -> tuple:
    """Matrix of x -> x*a over the base field."""
    if isinstance(a, Element):
        return _rep(a.ring, a.value, False)
    return _rep(ring, a, False)
