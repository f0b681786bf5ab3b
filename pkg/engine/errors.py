# engine/errors.py

from __future__ import annotations

from typing import Any


class FractalZetaError(Exception):
    """
    Root of every library error.

    Carries a `details` dict that the CLI renders next to the message, and the
    process exit code the CLI should use when the error escapes a command.
    """

    exit_code: int = 1

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "message": str(self),
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(v: Any) -> Any:
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


class InvalidInput(FractalZetaError):
    exit_code = 3


class NumericFailure(FractalZetaError):
    exit_code = 4


# --- input validation -------------------------------------------------------


class NonPositiveLength(InvalidInput):
    pass


class DivergentTail(InvalidInput):
    pass


class AbscissaViolation(InvalidInput):
    pass


class NonPositiveScale(InvalidInput):
    pass


class ArityMismatch(InvalidInput):
    pass


class InvalidCantorParameters(InvalidInput):
    pass


class NonPositiveT(InvalidInput):
    pass


class DepthOverflow(InvalidInput):
    pass


class InsufficientDepth(InvalidInput):
    pass


class NoRealRoot(InvalidInput):
    pass


class NotAPole(InvalidInput):
    pass


class PoleHit(InvalidInput):
    pass


class AllZeroCoefficients(InvalidInput):
    pass


class DegenerateDimension(InvalidInput):
    pass


class EmptyWindow(InvalidInput):
    pass


class UnsupportedKind(InvalidInput):
    pass


class InsufficientRange(InvalidInput):
    pass


class DegenerateD(InvalidInput):
    pass


class IncompatibleUnion(InvalidInput):
    pass


class MeasureDivergence(InvalidInput):
    pass


class UnknownExample(InvalidInput):
    pass


# --- numeric failures -------------------------------------------------------


class ToleranceUnreachable(NumericFailure):
    pass


class TruncationTooSmall(NumericFailure):
    pass


class SeedGridTooCoarse(NumericFailure):
    pass


class ContourContainsOtherPole(NumericFailure):
    pass


class NonIntegrable(NumericFailure):
    pass


class GeneratorValidationFailed(NumericFailure):
    pass


class QuadratureFailure(NumericFailure):
    pass


class EntireFactorFailure(NumericFailure):
    pass


class ZeroNotConverged(NumericFailure):
    pass


__all__ = [
    "FractalZetaError",
    "InvalidInput",
    "NumericFailure",
    "NonPositiveLength",
    "DivergentTail",
    "AbscissaViolation",
    "NonPositiveScale",
    "ArityMismatch",
    "InvalidCantorParameters",
    "NonPositiveT",
    "DepthOverflow",
    "InsufficientDepth",
    "NoRealRoot",
    "NotAPole",
    "PoleHit",
    "AllZeroCoefficients",
    "DegenerateDimension",
    "EmptyWindow",
    "UnsupportedKind",
    "InsufficientRange",
    "DegenerateD",
    "IncompatibleUnion",
    "MeasureDivergence",
    "UnknownExample",
    "ToleranceUnreachable",
    "TruncationTooSmall",
    "SeedGridTooCoarse",
    "ContourContainsOtherPole",
    "NonIntegrable",
    "GeneratorValidationFailed",
    "QuadratureFailure",
    "EntireFactorFailure",
    "ZeroNotConverged",
]
