"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`InputError` -> 2,
:class:`NumericalError` -> 3, :class:`NotInvertibleError` -> 4.
"""


class FiltinvError(Exception):
    """Base class for all errors raised by this package."""


class InputError(FiltinvError, ValueError):
    """Malformed or inconsistent input (shapes, file formats, bad parameters)."""


class NumericalError(FiltinvError, ArithmeticError):
    """A numerical procedure failed to meet its accuracy contract."""


class RootFindingError(NumericalError):
    def __init__(self, coeffs, residual):
        self.coeffs = list(coeffs)
        self.residual = float(residual)
        super().__init__(
            f"root finder did not converge for polynomial {self.coeffs} "
            f"(max residual {self.residual:.3e})"
        )


class DegenerateBasisError(NumericalError):
    """Kernel basis vectors are numerically collinear on the given window."""


class NotSeparableError(NumericalError):
    def __init__(self, residual, tol):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(
            f"kernel is not separable: relative residual {self.residual:.3e} > tol {self.tol:.1e}"
        )


class NotInvertibleError(FiltinvError):
    """Raised when an exact inverse is requested for a non-invertible factor."""

    def __init__(self, params):
        self.params = [complex(p) if complex(p).imag else float(complex(p).real) for p in params]
        shown = ", ".join(f"p={p:g}" if isinstance(p, float) else f"p={p}" for p in self.params)
        super().__init__(f"not invertible: {shown}")


class UseKernelPathError(FiltinvError):
    """No bounded pseudo-inverse of the oscillatory form exists for |p| >= 2."""


class TrivialKernelError(FiltinvError):
    """The elementary filter is invertible, so its kernel is {0}."""
