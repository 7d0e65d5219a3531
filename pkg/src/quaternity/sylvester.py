"""Solvability of generalized Sylvester systems.

Two independent routes decide whether a system has a solution:

* :func:`check` evaluates a fixed list of rank equalities between block
  matrices built from the coefficients and right-hand sides;
* :func:`solve_linearized` writes every unknown entry in base-field
  coordinates, assembles one linear system over Q or GF(p) and solves it.

:func:`cross_check` runs both and records whether they agree.

System kinds::

    two_unknown       AXE + BYH = Phi,   CXF = Psi,   DXG = Omega
    three_unknown     AXE + BY + ZH = Phi, CXF = Psi, DXG = Omega
    classical_triple  AXE = Phi,         CXF = Psi,   DXG = Omega
    hermitian_3_4     AXA* + BYB* = Phi, CXC* = Psi,  DXD* = Omega,  X = X*, Y = Y*
    hermitian_3_5     AXA* + BYB* = Phi, CXD = Omega,                X = X*, Y = Y*
    hermitian_3_7     AXA* + BY + (BY)* = Phi, CXC* = Psi, DXD* = Omega, X = X*
    hermitian_3_8     AXA* + BY + (BY)* = Phi, CXD = Omega,               X = X*
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import CharacteristicTwo, Infeasible, NotHermitianRHS, ParseError, ShapeMismatch
from .matrix import Matrix, block, conjugate_transpose, rank, solve_right
from .scalar import RingDescriptor, regular_representation, right_representation

__all__ = [
    "SystemKind",
    "SystemInstance",
    "Condition",
    "ConditionResult",
    "SolvabilityReport",
    "Solution",
    "AgreementRecord",
    "CONDITIONS",
    "EQUATIONS",
    "HERMITIAN_KINDS",
    "unknown_shapes",
    "substitute",
    "check",
    "check_two_unknown",
    "check_three_unknown",
    "check_classical_triple",
    "check_hermitian",
    "solve_linearized",
    "cross_check",
]


class SystemKind(str, enum.Enum):
    TWO_UNKNOWN = "two_unknown"
    THREE_UNKNOWN = "three_unknown"
    CLASSICAL_TRIPLE = "classical_triple"
    HERMITIAN_3_4 = "hermitian_3_4"
    HERMITIAN_3_5 = "hermitian_3_5"
    HERMITIAN_3_7 = "hermitian_3_7"
    HERMITIAN_3_8 = "hermitian_3_8"


K = SystemKind
HERMITIAN_KINDS = frozenset({K.HERMITIAN_3_4, K.HERMITIAN_3_5, K.HERMITIAN_3_7, K.HERMITIAN_3_8})

# coefficient and right-hand-side names per kind
INPUTS: dict[SystemKind, tuple[str, ...]] = {
    K.TWO_UNKNOWN: ("A", "B", "C", "D", "E", "F", "G", "H", "Phi", "Psi", "Omega"),
    K.THREE_UNKNOWN: ("A", "B", "C", "D", "E", "F", "G", "H", "Phi", "Psi", "Omega"),
    K.CLASSICAL_TRIPLE: ("A", "C", "D", "E", "F", "G", "Phi", "Psi", "Omega"),
    K.HERMITIAN_3_4: ("A", "B", "C", "D", "Phi", "Psi", "Omega"),
    K.HERMITIAN_3_5: ("A", "B", "C", "D", "Phi", "Omega"),
    K.HERMITIAN_3_7: ("A", "B", "C", "D", "Phi", "Psi", "Omega"),
    K.HERMITIAN_3_8: ("A", "B", "C", "D", "Phi", "Omega"),
}

# right-hand sides that must equal their own conjugate transpose
HERMITIAN_RHS: dict[SystemKind, tuple[str, ...]] = {
    K.HERMITIAN_3_4: ("Phi", "Psi", "Omega"),
    K.HERMITIAN_3_5: ("Phi",),
    K.HERMITIAN_3_7: ("Phi", "Psi", "Omega"),
    K.HERMITIAN_3_8: ("Phi",),
}

# unknowns that must be Hermitian in the solution
HERMITIAN_UNKNOWNS: dict[SystemKind, tuple[str, ...]] = {
    K.HERMITIAN_3_4: ("X", "Y"),
    K.HERMITIAN_3_5: ("X", "Y"),
    K.HERMITIAN_3_7: ("X",),
    K.HERMITIAN_3_8: ("X",),
}


# -- equation templates ---------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """left @ U @ right, or left @ U* @ right when ``star``; None means identity."""

    left: str | None
    unknown: str
    right: str | None
    star: bool = False


@dataclass(frozen=True)
class Equation:
    terms: tuple[Term, ...]
    rhs: str


def _eq(rhs: str, *terms: tuple) -> Equation:
    return Equation(tuple(Term(*t) for t in terms), rhs)


EQUATIONS: dict[SystemKind, tuple[Equation, ...]] = {
    K.TWO_UNKNOWN: (
        _eq("Phi", ("A", "X", "E"), ("B", "Y", "H")),
        _eq("Psi", ("C", "X", "F")),
        _eq("Omega", ("D", "X", "G")),
    ),
    K.THREE_UNKNOWN: (
        _eq("Phi", ("A", "X", "E"), ("B", "Y", None), (None, "Z", "H")),
        _eq("Psi", ("C", "X", "F")),
        _eq("Omega", ("D", "X", "G")),
    ),
    K.CLASSICAL_TRIPLE: (
        _eq("Phi", ("A", "X", "E")),
        _eq("Psi", ("C", "X", "F")),
        _eq("Omega", ("D", "X", "G")),
    ),
    K.HERMITIAN_3_4: (
        _eq("Phi", ("A", "X", "A*"), ("B", "Y", "B*")),
        _eq("Psi", ("C", "X", "C*")),
        _eq("Omega", ("D", "X", "D*")),
    ),
    K.HERMITIAN_3_5: (
        _eq("Phi", ("A", "X", "A*"), ("B", "Y", "B*")),
        _eq("Omega", ("C", "X", "D")),
    ),
    K.HERMITIAN_3_7: (
        _eq("Phi", ("A", "X", "A*"), ("B", "Y", None), (None, "Y", "B*", True)),
        _eq("Psi", ("C", "X", "C*")),
        _eq("Omega", ("D", "X", "D*")),
    ),
    K.HERMITIAN_3_8: (
        _eq("Phi", ("A", "X", "A*"), ("B", "Y", None), (None, "Y", "B*", True)),
        _eq("Omega", ("C", "X", "D")),
    ),
}

# Unconstrained systems whose solvability is equivalent to the Hermitian one;
# a solution is symmetrized afterwards. Unknowns carry a trailing "~".
RELAXED: dict[SystemKind, tuple[Equation, ...]] = {
    K.HERMITIAN_3_4: (
        _eq("Phi", ("A", "X~", "A*"), ("B", "Y~", "B*")),
        _eq("Psi", ("C", "X~", "C*")),
        _eq("Omega", ("D", "X~", "D*")),
    ),
    K.HERMITIAN_3_5: (
        _eq("Phi", ("A", "X~", "A*"), ("B", "Y~", "B*")),
        _eq("Omega", ("C", "X~", "D")),
        _eq("Omega*", ("D*", "X~", "C*")),
    ),
    K.HERMITIAN_3_7: (
        _eq("Phi", ("A", "X~", "A*"), ("B", "Y~", None), (None, "Z~", "B*")),
        _eq("Psi", ("C", "X~", "C*")),
        _eq("Omega", ("D", "X~", "D*")),
    ),
    K.HERMITIAN_3_8: (
        _eq("Phi", ("A", "X~", "A*"), ("B", "Y~", None), (None, "Z~", "B*")),
        _eq("Omega", ("C", "X~", "D")),
        _eq("Omega*", ("D*", "X~", "C*")),
    ),
}


# -- instances ------------------------------------------------------------------

@dataclass(frozen=True)
class SystemInstance:
    kind: SystemKind
    ring: RingDescriptor
    matrices: dict[str, Matrix]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SystemKind(self.kind))
        missing = [n for n in INPUTS[self.kind] if n not in self.matrices]
        if missing:
            raise ShapeMismatch(f"{self.kind.value}: missing matrices {missing}")
        extra = [n for n in self.matrices if n not in INPUTS[self.kind]]
        if extra:
            raise ShapeMismatch(f"{self.kind.value}: unexpected matrices {extra}")
        for n, m in self.matrices.items():
            if m.ring != self.ring:
                raise ShapeMismatch(f"matrix {n} is over {m.ring.label}, instance is over {self.ring.label}")
        unknown_shapes(self)

    def __getitem__(self, name: str) -> Matrix:
        return self.matrices[name]

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "ring": self.ring.kind.value,
            "p": self.ring.modulus,
            "matrices": {n: self.matrices[n].to_json() for n in INPUTS[self.kind]},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: Any) -> "SystemInstance":
        if not isinstance(obj, dict):
            raise ParseError("instance: expected a JSON object")
        try:
            kind = SystemKind(obj.get("kind"))
        except ValueError as exc:
            raise ParseError(f"field 'kind': unknown system kind {obj.get('kind')!r}") from exc
        ring = RingDescriptor.from_json(obj)
        mats = obj.get("matrices")
        if not isinstance(mats, dict):
            raise ParseError("field 'matrices': expected an object of named matrices")
        parsed = {n: Matrix.from_json(m, where=f"matrices.{n}") for n, m in mats.items()}
        return cls(kind, ring, parsed)

    @classmethod
    def loads(cls, text: str) -> "SystemInstance":
        return cls.from_json(json.loads(text))


def _token(mats: dict[str, Matrix], tok: str, cache: dict[str, Matrix] | None = None) -> Matrix:
    if cache is not None and tok in cache:
        return cache[tok]
    neg = tok.startswith("-")
    name = tok[1:] if neg else tok
    star = name.endswith("*")
    name = name[:-1] if star else name
    if name not in mats:
        raise ShapeMismatch(f"unknown matrix name {name!r}")
    m = mats[name]
    if star:
        m = conjugate_transpose(m)
    if neg:
        m = -m
    if cache is not None:
        cache[tok] = m
    return m


def unknown_shapes(inst: SystemInstance) -> dict[str, tuple[int, int]]:
    """Shapes of the unknowns; also validates every equation's shapes."""
    m = inst.matrices
    k = inst.kind
    A = m["A"]
    if k in (K.TWO_UNKNOWN, K.THREE_UNKNOWN, K.CLASSICAL_TRIPLE):
        shapes = {"X": (A.cols, m["E"].rows)}
        if k is K.TWO_UNKNOWN:
            shapes["Y"] = (m["B"].cols, m["H"].rows)
        elif k is K.THREE_UNKNOWN:
            shapes["Y"] = (m["B"].cols, m["Phi"].cols)
            shapes["Z"] = (m["Phi"].rows, m["H"].rows)
    elif k in (K.HERMITIAN_3_4, K.HERMITIAN_3_5):
        shapes = {"X": (A.cols, A.cols), "Y": (m["B"].cols, m["B"].cols)}
    else:
        shapes = {"X": (A.cols, A.cols), "Y": (m["B"].cols, A.rows)}
    for eq in EQUATIONS[k]:
        _check_equation(m, eq, shapes)
    return shapes


def _term_dims(mats, t: Term, shapes) -> tuple[int, int]:
    r, c = shapes[t.unknown]
    if t.star:
        r, c = c, r
    rows, cols = r, c
    if t.left is not None:
        L = _token(mats, t.left)
        if L.cols != r:
            raise ShapeMismatch(f"{t.left} has {L.cols} columns but {t.unknown} needs {r}")
        rows = L.rows
    if t.right is not None:
        R = _token(mats, t.right)
        if R.rows != c:
            raise ShapeMismatch(f"{t.right} has {R.rows} rows but {t.unknown} needs {c}")
        cols = R.cols
    return rows, cols


def _check_equation(mats, eq: Equation, shapes) -> None:
    rhs = _token(mats, eq.rhs)
    for t in eq.terms:
        dims = _term_dims(mats, t, shapes)
        if dims != rhs.shape:
            raise ShapeMismatch(f"term {t.left or ''}{t.unknown}{t.right or ''} is {dims[0]}x{dims[1]}, "
                                f"{eq.rhs} is {rhs.rows}x{rhs.cols}")


def _evaluate(mats, eq: Equation, values: dict[str, Matrix]) -> Matrix:
    rhs = _token(mats, eq.rhs)
    acc = Matrix.zeros(rhs.ring, rhs.rows, rhs.cols)
    for t in eq.terms:
        u = values[t.unknown]
        if t.star:
            u = conjugate_transpose(u)
        if t.left is not None:
            u = _token(mats, t.left) @ u
        if t.right is not None:
            u = u @ _token(mats, t.right)
        acc = acc + u
    return acc


def substitute(inst: SystemInstance, values: dict[str, Matrix]) -> dict[str, Matrix]:
    """Left-hand side of each equation, keyed by the right-hand-side name."""
    return {eq.rhs: _evaluate(inst.matrices, eq, values) for eq in EQUATIONS[inst.kind]}


def satisfies(inst: SystemInstance, values: dict[str, Matrix]) -> bool:
    return all(v == inst[k] for k, v in substitute(inst, values).items())


# -- rank conditions ------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    """rank(lhs) == sum(coef * rank(recipe) for coef, recipe in rhs).

    Recipes are block grids: rows separated by ';', slots by spaces. A slot is
    a matrix name, '0', a name with a trailing '*' (conjugate transpose), or a
    leading '-' (negation).
    """

    label: str
    lhs: str
    rhs: tuple[tuple[int, str], ...]

    def rhs_text(self) -> str:
        return " + ".join((f"{c} r({r})" if c != 1 else f"r({r})") for c, r in self.rhs)


def _c(label: str, lhs: str, *rhs: str | tuple[int, str]) -> Condition:
    return Condition(label, lhs, tuple(x if isinstance(x, tuple) else (1, x) for x in rhs))


_TWO_UNKNOWN = (
    _c("phi-a-h", "Phi A; H 0", "A", "H"),
    _c("phi-b-e", "Phi B; E 0", "B", "E"),
    _c("col-range-phi", "A B Phi", "A B"),
    _c("row-range-phi", "E; H; Phi", "E; H"),
    _c("col-range-psi", "C Psi", "C"),
    _c("col-range-omega", "D Omega", "D"),
    _c("row-range-psi", "F; Psi", "F"),
    _c("row-range-omega", "G; Omega", "G"),
    _c("psi-omega", "Psi 0 C; 0 -Omega D; F G 0", "C; D", "F G"),
    _c("phi-psi-left", "0 0 E F; A B -Phi 0; C 0 0 Psi", "A B; C 0", "E F"),
    _c("phi-psi-right", "0 E F; 0 H 0; A -Phi 0; C 0 Psi", "E F; H 0", "A; C"),
    _c("phi-omega-left", "0 0 E G; A B -Phi 0; D 0 0 Omega", "A B; D 0", "E G"),
    _c("phi-omega-right", "0 E G; 0 H 0; A -Phi 0; D 0 Omega", "E G; H 0", "A; D"),
    _c("phi-psi-omega-aa",
       "0 0 E F G; 0 0 H 0 0; A A -Phi 0 0; C 0 0 Psi 0; 0 D 0 0 Omega",
       "E F G; H 0 0", "A A; C 0; 0 D"),
    _c("phi-psi-omega-ee",
       "0 0 E F 0; 0 0 E 0 G; A B -Phi 0 0; C 0 0 Psi 0; D 0 0 0 Omega",
       "A B; C 0; D 0", "E F 0; E 0 G"),
    _c("phi-psi-omega-aab",
       "0 0 0 E F G; A A B -Phi 0 0; C 0 0 0 Psi 0; 0 D 0 0 0 Omega",
       "E F G", "A A B; C 0 0; 0 D 0"),
    _c("phi-psi-omega-eeh",
       "0 E F 0; 0 E 0 G; 0 H 0 0; A -Phi 0 0; C 0 Psi 0; D 0 0 Omega",
       "A; C; D", "E F 0; E 0 G; H 0 0"),
    _c("full-coupling",
       "0 0 0 0 0 0 H; 0 0 0 G 0 E 0; 0 0 0 0 F E E; 0 C 0 0 -Psi 0 0; "
       "0 0 D Omega 0 0 0; 0 A A 0 0 0 Phi; B 0 A 0 0 -Phi 0",
       "0 A B; A A 0; C 0 0; 0 D 0", "0 E F 0; E E 0 G; H 0 0 0"),
)

_THREE_UNKNOWN = (
    _c("phi-ab-h", "Phi A B; H 0 0", "A B", "H"),
    _c("col-range-psi", "C Psi", "C"),
    _c("col-range-omega", "D Omega", "D"),
    _c("phi-b-eh", "Phi B; E 0; H 0", "B", "E; H"),
    _c("row-range-psi", "F; Psi", "F"),
    _c("row-range-omega", "G; Omega", "G"),
    _c("phi-psi", "Phi 0 A B; 0 -Psi C 0; E F 0 0; H 0 0 0", "A B; C 0", "E F; H 0"),
    _c("phi-omega", "Phi 0 A B; 0 -Omega D 0; E G 0 0; H 0 0 0", "A B; D 0", "E G; H 0"),
    _c("psi-omega", "Psi 0 C; 0 -Omega D; F G 0", "C; D", "F G"),
    _c("phi-psi-omega-aab",
       "Phi 0 0 A A B; 0 -Psi 0 C 0 0; 0 0 -Omega 0 D 0; E F G 0 0 0; H 0 0 0 0 0",
       "A A B; C 0 0; 0 D 0", "E F G; H 0 0"),
    _c("phi-psi-omega-eeh",
       "Phi 0 0 A B; 0 -Psi 0 C 0; 0 0 -Omega D 0; E F 0 0 0; E 0 G 0 0; H 0 0 0 0",
       "A B; C 0; D 0", "E F 0; E 0 G; H 0 0"),
)

_HERMITIAN_3_4 = (
    _c("phi-a-b", "Phi A; B* 0", "A", "B"),
    _c("col-range-phi", "A B Phi", "A B"),
    _c("col-range-psi", "C Psi", "C"),
    _c("col-range-omega", "D Omega", "D"),
    _c("psi-omega", "Psi 0 C; 0 -Omega D; C* D* 0", (2, "C; D")),
    _c("phi-psi", "0 0 A* C*; A B -Phi 0; C 0 0 Psi", "A B; C 0", "A; C"),
    _c("phi-omega", "0 0 A* D*; A B -Phi 0; D 0 0 Omega", "A B; D 0", "A; D"),
    _c("phi-psi-omega-aa",
       "0 0 A* C* D*; 0 0 B* 0 0; A A -Phi 0 0; C 0 0 Psi 0; 0 D 0 0 Omega",
       "A B; C 0; D 0", "A A; C 0; 0 D"),
    _c("phi-psi-omega-aab",
       "0 0 0 A* C* D*; A A B -Phi 0 0; C 0 0 0 Psi 0; 0 D 0 0 0 Omega",
       "A; C; D", "A A B; C 0 0; 0 D 0"),
    _c("full-coupling",
       "0 0 0 0 0 0 B*; 0 0 0 D* 0 A* 0; 0 0 0 0 C* A* A*; 0 C 0 0 -Psi 0 0; "
       "0 0 D Omega 0 0 0; 0 A A 0 0 0 Phi; B 0 A 0 0 -Phi 0",
       (2, "0 A B; A A 0; C 0 0; 0 D 0")),
)

_HERMITIAN_3_5 = (
    _c("phi-a-b", "Phi A; B* 0", "A", "B"),
    _c("col-range-phi", "A B Phi", "A B"),
    _c("col-range-omega", "C Omega", "C"),
    _c("row-range-omega", "D; Omega", "D"),
    _c("omega-coupling", "Omega 0 C; 0 -Omega* D*; D C* 0", (2, "C; D*")),
    _c("phi-omega-left", "0 0 A* D; A B -Phi 0; C 0 0 Omega", "A B; C 0", "A* D"),
    _c("phi-omega-right", "0 A* D; 0 B* 0; A -Phi 0; C 0 Omega", "A* D; B* 0", "A; C"),
    _c("phi-omega-aa",
       "0 0 A* D C*; 0 0 B* 0 0; A A -Phi 0 0; C 0 0 Omega 0; 0 D* 0 0 Omega*",
       "A B; C 0; D* 0", "A A; C 0; 0 D*"),
    _c("phi-omega-aab",
       "0 0 0 A* D C*; A A B -Phi 0 0; C 0 0 0 Omega 0; 0 D* 0 0 0 Omega*",
       "A; C; D*", "A A B; C 0 0; 0 D* 0"),
    _c("full-coupling",
       "0 0 0 0 0 0 B*; 0 0 0 C* 0 A* 0; 0 0 0 0 D A* A*; 0 C 0 0 -Omega 0 0; "
       "0 0 D* Omega* 0 0 0; 0 A A 0 0 0 Phi; B 0 A 0 0 -Phi 0",
       (2, "0 A B; A A 0; C 0 0; 0 D* 0")),
)

_HERMITIAN_3_7 = (
    _c("phi-ab-b", "Phi A B; B* 0 0", "A B", "B"),
    _c("col-range-psi", "C Psi", "C"),
    _c("col-range-omega", "D Omega", "D"),
    _c("phi-psi", "Phi 0 A B; 0 -Psi C 0; A* C* 0 0; B* 0 0 0", (2, "A B; C 0")),
    _c("phi-omega", "Phi 0 A B; 0 -Omega D 0; A* D* 0 0; B* 0 0 0", (2, "A B; D 0")),
    _c("psi-omega", "Psi 0 C; 0 -Omega D; C* D* 0", (2, "C; D")),
    _c("phi-psi-omega-aab",
       "Phi 0 0 A A B; 0 -Psi 0 C 0 0; 0 0 -Omega 0 D 0; A* C* D* 0 0 0; B* 0 0 0 0 0",
       "A A B; C 0 0; 0 D 0", "A B; C 0; D 0"),
)

_HERMITIAN_3_8 = (
    _c("phi-ab-b", "Phi A B; B* 0 0", "A B", "B"),
    _c("col-range-omega", "C Omega", "C"),
    _c("row-range-omega", "D; Omega", "D"),
    _c("phi-omega", "Phi 0 A B; 0 -Omega C 0; A* D 0 0; B* 0 0 0", "A B; C 0", "A B; D* 0"),
    _c("omega-coupling", "Omega 0 C; 0 -Omega* D*; D C* 0", (2, "C; D*")),
    _c("phi-omega-aab",
       "Phi 0 0 A A B; 0 -Omega 0 C 0 0; 0 0 -Omega* 0 D* 0; A* D C* 0 0 0; B* 0 0 0 0 0",
       "A A B; C 0 0; 0 D* 0", "A B; C 0; D* 0"),
)

CONDITIONS: dict[SystemKind, tuple[Condition, ...]] = {
    K.TWO_UNKNOWN: _TWO_UNKNOWN,
    K.THREE_UNKNOWN: _THREE_UNKNOWN,
    K.HERMITIAN_3_4: _HERMITIAN_3_4,
    K.HERMITIAN_3_5: _HERMITIAN_3_5,
    K.HERMITIAN_3_7: _HERMITIAN_3_7,
    K.HERMITIAN_3_8: _HERMITIAN_3_8,
}


@dataclass(frozen=True)
class ConditionResult:
    label: str
    lhs_matrix_recipe: str
    lhs_rank: int
    rhs_rank_expression: str
    rhs_rank: int

    @property
    def holds(self) -> bool:
        return self.lhs_rank == self.rhs_rank

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "lhs_matrix_recipe": self.lhs_matrix_recipe,
            "lhs_rank": self.lhs_rank,
            "rhs_rank_expression": self.rhs_rank_expression,
            "rhs_rank": self.rhs_rank,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class SolvabilityReport:
    kind: SystemKind
    conditions: tuple[ConditionResult, ...]

    @property
    def verdict(self) -> bool:
        return all(c.holds for c in self.conditions)

    def failed(self) -> list[str]:
        return [c.label for c in self.conditions if not c.holds]

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "verdict": self.verdict,
            "conditions": [c.to_json() for c in self.conditions],
        }


def assemble_recipe(mats: dict[str, Matrix], recipe: str, cache: dict | None = None) -> Matrix:
    grid = [[0 if tok == "0" else _token(mats, tok, cache) for tok in row.split()]
            for row in recipe.split(";")]
    return block(grid)


def _evaluate_conditions(kind: SystemKind, mats: dict[str, Matrix],
                         conditions: Iterable[Condition]) -> SolvabilityReport:
    tokens: dict[str, Matrix] = {}
    ranks: dict[str, int] = {}

    def r(recipe: str) -> int:
        key = " ".join(recipe.split())
        if key not in ranks:
            ranks[key] = rank(assemble_recipe(mats, recipe, tokens))
        return ranks[key]

    results = tuple(
        ConditionResult(c.label, c.lhs, r(c.lhs), c.rhs_text(), sum(k * r(x) for k, x in c.rhs))
        for c in conditions
    )
    return SolvabilityReport(kind, results)


def _require(inst: SystemInstance, *kinds: SystemKind) -> None:
    if inst.kind not in kinds:
        raise ValueError(f"expected an instance of kind {[k.value for k in kinds]}, got {inst.kind.value}")


def check_two_unknown(inst: SystemInstance) -> SolvabilityReport:
    _require(inst, K.TWO_UNKNOWN)
    return _evaluate_conditions(inst.kind, inst.matrices, _TWO_UNKNOWN)


def check_three_unknown(inst: SystemInstance) -> SolvabilityReport:
    _require(inst, K.THREE_UNKNOWN)
    return _evaluate_conditions(inst.kind, inst.matrices, _THREE_UNKNOWN)


def check_classical_triple(inst: SystemInstance) -> SolvabilityReport:
    """AXE = Phi etc. checked as the two-unknown system with an empty Y."""
    _require(inst, K.CLASSICAL_TRIPLE)
    m = dict(inst.matrices)
    ring = inst.ring
    m["B"] = Matrix.zeros(ring, m["A"].rows, 0)
    m["H"] = Matrix.zeros(ring, 0, m["E"].cols)
    rep = _evaluate_conditions(K.TWO_UNKNOWN, m, _TWO_UNKNOWN)
    return SolvabilityReport(K.CLASSICAL_TRIPLE, rep.conditions)


def _hermitian_preconditions(inst: SystemInstance) -> None:
    if inst.ring.characteristic == 2:
        raise CharacteristicTwo(f"{inst.kind.value} needs characteristic other than 2")
    for name in HERMITIAN_RHS[inst.kind]:
        if not inst[name].is_hermitian():
            raise NotHermitianRHS(f"{name} is not equal to its conjugate transpose")


def check_hermitian(inst: SystemInstance) -> SolvabilityReport:
    _require(inst, *HERMITIAN_KINDS)
    _hermitian_preconditions(inst)
    return _evaluate_conditions(inst.kind, inst.matrices, CONDITIONS[inst.kind])


def check(inst: SystemInstance) -> SolvabilityReport:
    if inst.kind is K.TWO_UNKNOWN:
        return check_two_unknown(inst)
    if inst.kind is K.THREE_UNKNOWN:
        return check_three_unknown(inst)
    if inst.kind is K.CLASSICAL_TRIPLE:
        return check_classical_triple(inst)
    return check_hermitian(inst)


# -- linearization oracle ---------------------------------------------------------

@dataclass(frozen=True)
class Solution:
    values: dict[str, Matrix]
    hermitian_flags: dict[str, bool]

    def __getitem__(self, name: str) -> Matrix:
        return self.values[name]

    def to_json(self) -> dict:
        return {
            "unknowns": {k: v.to_json() for k, v in sorted(self.values.items())},
            "hermitian_flags": dict(sorted(self.hermitian_flags.items())),
        }


def _mat_mul_base(base: RingDescriptor, a: tuple, b: tuple) -> tuple:
    add, mul, z = base.add, base.mul, base.zero
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = z
            for t in range(k):
                acc = add(acc, mul(a[i][t], b[t][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _linear_system(mats, equations: tuple[Equation, ...], shapes: dict[str, tuple[int, int]],
                   ring: RingDescriptor):
    """Coefficient rows and right-hand side over the base field.

    Unknown entry (k, l) of U contributes, to entry (i, j) of an equation,
    rep(L[i,k]) rep_right(R[l,j]) (J) applied to its coordinates, where J flips
    the imaginary signs when the term uses U*.
    """
    base = ring.base
    d = ring.base_dim
    z, one = base.zero, base.one
    offsets, nvar = {}, 0
    for name, (r, c) in shapes.items():
        offsets[name] = nvar
        nvar += r * c * d
    conj = tuple(tuple((one if a == 0 else base.neg(one)) if a == b else z for b in range(d)) for a in range(d))
    lrep = lambda x: regular_representation(x, ring)  # noqa: E731
    rrep = lambda x: right_representation(x, ring)  # noqa: E731
    rows, rhs = [], []
    isz = ring.is_zero
    for eq in equations:
        target = _token(mats, eq.rhs)
        n1, n2 = target.shape
        block_rows = [[z] * nvar for _ in range(n1 * n2 * d)]
        for t in eq.terms:
            r, c = shapes[t.unknown]
            L = _token(mats, t.left).data if t.left is not None else None
            R = _token(mats, t.right).data if t.right is not None else None
            vr, vc = (c, r) if t.star else (r, c)
            off = offsets[t.unknown]
            for i in range(n1):
                ks = range(vr) if L is not None else (i,)
                for k in ks:
                    a = L[i][k] if L is not None else ring.one
                    if isz(a):
                        continue
                    ra = lrep(a)
                    for j in range(n2):
                        ls = range(vc) if R is not None else (j,)
                        for l in ls:
                            b = R[l][j] if R is not None else ring.one
                            if isz(b):
                                continue
                            coef = _mat_mul_base(base, ra, rrep(b))
                            if t.star:
                                coef = _mat_mul_base(base, coef, conj)
                                ui, uj = l, k
                            else:
                                ui, uj = k, l
                            col0 = off + (ui * c + uj) * d
                            row0 = (i * n2 + j) * d
                            for a_ in range(d):
                                row = block_rows[row0 + a_]
                                for b_ in range(d):
                                    row[col0 + b_] = base.add(row[col0 + b_], coef[a_][b_])
        rows.extend(block_rows)
        for i in range(n1):
            for j in range(n2):
                rhs.extend(ring.coords(target.data[i][j]))
    return rows, rhs, offsets, nvar


def _solve_system(mats, equations, shapes, ring: RingDescriptor) -> dict[str, Matrix]:
    base = ring.base
    rows, rhs, offsets, nvar = _linear_system(mats, equations, shapes, ring)
    d = ring.base_dim
    if nvar == 0:
        if any(not base.is_zero(x) for x in rhs):
            raise Infeasible("no unknowns and a nonzero right-hand side")
        u = ()
    elif not rows:
        u = (base.zero,) * nvar
    else:
        M = Matrix._raw(base, tuple(tuple(r) for r in rows), len(rows), nvar)
        b = Matrix._raw(base, tuple((x,) for x in rhs), len(rhs), 1)
        sol = solve_right(M, b)
        u = tuple(r[0] for r in sol.data)
    out = {}
    for name, (r, c) in shapes.items():
        off = offsets[name]
        data = tuple(
            tuple(ring.from_coords(u[off + (i * c + j) * d: off + (i * c + j + 1) * d]) for j in range(c))
            for i in range(r)
        )
        out[name] = Matrix._raw(ring, data, r, c)
    return out


def _relaxed_mats(inst: SystemInstance) -> dict[str, Matrix]:
    m = dict(inst.matrices)
    if "Omega" in m:
        m["Omega*"] = conjugate_transpose(m["Omega"])
    return m


def solve_linearized(inst: SystemInstance) -> Solution:
    """An exact solution, verified by substitution; raises Infeasible if none exists.

    Hermitian kinds solve an unconstrained companion system and symmetrize:
    X = (X~ + X~*)/2 and Y = (Y~ + Y~*)/2, or Y = (Y~ + Z~*)/2 when Y enters
    as BY + (BY)*.
    """
    shapes = unknown_shapes(inst)
    ring = inst.ring
    if inst.kind not in HERMITIAN_KINDS:
        values = _solve_system(inst.matrices, EQUATIONS[inst.kind], shapes, ring)
        flags = {k: False for k in values}
    else:
        _hermitian_preconditions(inst)
        rshapes = {"X~": shapes["X"]}
        if inst.kind in (K.HERMITIAN_3_4, K.HERMITIAN_3_5):
            rshapes["Y~"] = shapes["Y"]
        else:
            q, m = shapes["Y"]
            rshapes["Y~"] = (q, m)
            rshapes["Z~"] = (m, q)
        raw = _solve_system(_relaxed_mats(inst), RELAXED[inst.kind], rshapes, ring)
        half = ring.inv(ring.from_int(2))
        ct = conjugate_transpose
        X = (raw["X~"] + ct(raw["X~"])).scale_left(half)
        if inst.kind in (K.HERMITIAN_3_4, K.HERMITIAN_3_5):
            Y = (raw["Y~"] + ct(raw["Y~"])).scale_left(half)
        else:
            Y = (raw["Y~"] + ct(raw["Z~"])).scale_left(half)
        values = {"X": X, "Y": Y}
        flags = {k: values[k].is_hermitian() for k in values}
        for k in HERMITIAN_UNKNOWNS[inst.kind]:
            if not flags[k]:
                raise AssertionError(f"symmetrized {k} is not Hermitian")
    if not satisfies(inst, values):
        raise AssertionError("linearized solution does not substitute back")
    return Solution(values, flags)


# -- differential check -----------------------------------------------------------

@dataclass(frozen=True)
class AgreementRecord:
    kind: SystemKind
    checker_verdict: bool
    oracle_feasible: bool
    report: SolvabilityReport
    solution: Solution | None = None
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.error is None and self.checker_verdict == self.oracle_feasible

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "checker_verdict": self.checker_verdict,
            "oracle_feasible": self.oracle_feasible,
            "agree": self.agree,
            "failed_conditions": self.report.failed(),
            "report": self.report.to_json(),
        }
        if self.solution is not None:
            out["solution"] = self.solution.to_json()
        if self.error is not None:
            out["error"] = self.error
        out.update(self.extra)
        return out


def cross_check(inst: SystemInstance) -> AgreementRecord:
    report = check(inst)
    try:
        sol = solve_linearized(inst)
        feasible, err = True, None
    except Infeasible:
        sol, feasible, err = None, False, None
    except AssertionError as exc:
        sol, feasible, err = None, False, f"oracle self-check failed: {exc}"
    return AgreementRecord(inst.kind, report.verdict, feasible, report, sol, err)
