"""Exception types raised across the package."""


class FraclabError(Exception):
    """Base class for all package errors."""


class ConstraintViolation(FraclabError, ValueError):
    """A parameter falls outside its admissible window."""

    def __init__(self, name, value, bound, message=None):
        self.name = name
        self.value = value
        self.bound = bound
        super().__init__(message or f"{name}: value {value!r} violates bound {bound}")


class DegenerateExponent(FraclabError, ValueError):
    pass


class UnknownName(FraclabError, KeyError):
    pass


class NonIntegrableSingularity(FraclabError, ArithmeticError):
    pass


class NoConvergence(FraclabError, ArithmeticError):
    pass


class ZeroDensityRegion(FraclabError, ArithmeticError):
    pass


class RearrangementOnlyFunction(FraclabError, TypeError):
    """Function is flagged for rearrangement use only (no Gagliardo quadrature)."""


class NonMonotoneProfile(FraclabError, ValueError):
    pass


class DivergentQuasinorm(FraclabError, ArithmeticError):
    pass


class ExponentMismatch(FraclabError, ValueError):
    pass
