"""Exact canonical forms of matrix quaternities and rank criteria for Sylvester systems."""

from .errors import (
    CharacteristicTwo,
    DecompositionFailure,
    Infeasible,
    InternalInconsistency,
    NotHermitianRHS,
    ParseError,
    QuaternityError,
    ShapeMismatch,
    SingularMatrix,
    TooLarge,
    ZeroInverse,
)
from .matrix import (
    IDENTITY,
    Matrix,
    TrackedReduction,
    add,
    block,
    conjugate_transpose,
    hstack,
    invert_matrix,
    matmul,
    rank,
    row_reduce_tracked,
    vstack,
)
from .scalar import GF, HQ, QQ, Element, RingDescriptor, RingKind, conjugate, invert, regular_representation

__version__ = "0.1.0"
