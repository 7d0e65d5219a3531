"""Exception types shared across the package."""

from __future__ import annotations


class QuaternityError(Exception):
    """Base class for every error raised by this package."""


class ParseError(QuaternityError, ValueError):
    pass


class ZeroInverse(QuaternityError, ZeroDivisionError):
    pass


class ShapeMismatch(QuaternityError, ValueError):
    pass


class SingularMatrix(QuaternityError, ValueError):
    pass


class InternalInconsistency(QuaternityError, ArithmeticError):
    pass


class DecompositionFailure(QuaternityError, ArithmeticError):
    def __init__(self, stage: str, detail: str = "") -> None:
        self.stage = stage
        self.detail = detail
        msg = f"decomposition failed at stage {stage!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class CharacteristicTwo(QuaternityError, ValueError):
    pass


class NotHermitianRHS(QuaternityError, ValueError):
    pass


class Infeasible(QuaternityError):
    """Raised when a linear matrix-equation system has no exact solution."""


class TooLarge(QuaternityError, ValueError):
    pass
