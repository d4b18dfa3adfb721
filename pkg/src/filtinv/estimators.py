"""scikit-learn style wrappers around the deconvolution engines.

``FilterDeconvolver`` treats each row of ``X`` as one signal. The image
estimators take a single 2D array as ``X``. ``fit`` only prepares the
filter, since there is nothing to learn from data.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .charpoly import Filter
from .deconv1d import DeconvOptions, Deconvolver
from .elementary import DEFAULT_EPS_TRUNC
from .exceptions import InputError
from .rl_baseline import DEFAULT_ITERATIONS, RLOptions, richardson_lucy
from .separable2d import SEPARABLE_TOL, Kernel2D, SeparableDeconvolver


def check_signals(X) -> np.ndarray:
    """2D float array of signals, one per row; a 1D input becomes one row."""
    try:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        return check_array(X, dtype=float, ensure_all_finite=True)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def check_image(X) -> np.ndarray:
    try:
        return check_array(X, dtype=float, ensure_all_finite=True, ensure_min_samples=1)
    except ValueError as exc:
        raise InputError(str(exc)) from None


class FilterDeconvolver(TransformerMixin, BaseEstimator):
    """Direct 1D deconvolution of every row of ``X``.

    Parameters
    ----------
    coefficients : array-like
        Symmetric odd-length filter ``c(-N) .. c(N)``.
    eps_trunc : float
        Tail cut-off for inverse filters.
    boundary : {"reflect", "zero", "periodic"}
        Signal continuation used before inverse filtering.

    Attributes
    ----------
    deconvolver_ : Deconvolver
    decomposition_ : Decomposition
    report_ : DeconvReport
        Report of the most recent ``transform`` call.
    """

    def __init__(self, coefficients=None, eps_trunc: float = DEFAULT_EPS_TRUNC, boundary: str = "reflect"):
        self.coefficients = coefficients
        self.eps_trunc = eps_trunc
        self.boundary = boundary

    def fit(self, X=None, y=None):
        if self.coefficients is None:
            raise InputError("coefficients must be set before fit")
        opts = DeconvOptions(eps_trunc=self.eps_trunc, boundary=self.boundary)
        self.deconvolver_ = Deconvolver(Filter(self.coefficients), opts)
        self.decomposition_ = self.deconvolver_.decomposition
        self.report_ = None
        return self

    def transform(self, X):
        check_is_fitted(self, "deconvolver_")
        X = check_signals(X)
        rows = []
        for row in X:
            out, self.report_ = self.deconvolver_.apply(row)
            rows.append(out.values)
        return np.vstack(rows)


class SeparableDeconvolver2D(TransformerMixin, BaseEstimator):
    """Direct deconvolution of an image blurred by a separable kernel."""

    def __init__(self, kernel=None, eps_trunc: float = DEFAULT_EPS_TRUNC, boundary: str = "reflect", tol: float = SEPARABLE_TOL):
        self.kernel = kernel
        self.eps_trunc = eps_trunc
        self.boundary = boundary
        self.tol = tol

    def fit(self, X=None, y=None):
        if self.kernel is None:
            raise InputError("kernel must be set before fit")
        opts = DeconvOptions(eps_trunc=self.eps_trunc, boundary=self.boundary)
        self.deconvolver_ = SeparableDeconvolver(Kernel2D(self.kernel), opts, self.tol)
        self.factors_ = self.deconvolver_.factors
        self.report_ = None
        return self

    def transform(self, X):
        check_is_fitted(self, "deconvolver_")
        out, self.report_ = self.deconvolver_.apply(check_image(X))
        return np.array(out.pixels)


class RichardsonLucyDeconvolver(TransformerMixin, BaseEstimator):
    """Richardson-Lucy baseline with the same interface."""

    def __init__(self, psf=None, iterations: int = DEFAULT_ITERATIONS, guard_eps: float = 1e-12, boundary: str = "reflect"):
        self.psf = psf
        self.iterations = iterations
        self.guard_eps = guard_eps
        self.boundary = boundary

    def fit(self, X=None, y=None):
        if self.psf is None:
            raise InputError("psf must be set before fit")
        self.psf_ = check_image(self.psf)
        self.options_ = RLOptions(iterations=self.iterations, guard_eps=self.guard_eps, boundary=self.boundary)
        return self

    def transform(self, X):
        check_is_fitted(self, "options_")
        return np.array(richardson_lucy(check_image(X), self.psf_, self.options_).pixels)
