import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from filtinv.estimators import (
    FilterDeconvolver,
    RichardsonLucyDeconvolver,
    SeparableDeconvolver2D,
    check_signals,
)
from filtinv.exceptions import InputError
from filtinv.imaging_io import checkerboard
from filtinv.separable2d import Kernel2D, blur2d
from filtinv.signal import Sequence, apply_filter, centered


def _blurred_rows(coeffs, n_rows=4, length=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_rows, length))
    Y = np.vstack([apply_filter(Sequence(r), centered(coeffs)).values for r in X])
    return X, Y


def test_filter_deconvolver_rows():
    X, Y = _blurred_rows([1, 2.3, 1])
    est = FilterDeconvolver([1, 2.3, 1]).fit()
    out = est.transform(Y)
    assert out.shape == Y.shape
    assert np.sqrt(np.mean((out - X)[:, 40:-40] ** 2)) <= 1e-8
    assert est.decomposition_.params[0] == pytest.approx(2.3)
    assert est.report_.length_loss == 0


def test_filter_deconvolver_noninvertible_shortens():
    _, Y = _blurred_rows([1, 1, 1])
    out = FilterDeconvolver([1, 1, 1]).fit(Y).transform(Y)
    assert out.shape == (4, 198)


def test_params_and_clone():
    est = FilterDeconvolver([1, 2.3, 1], eps_trunc=1e-10, boundary="zero")
    params = est.get_params()
    assert params == {"coefficients": [1, 2.3, 1], "eps_trunc": 1e-10, "boundary": "zero"}
    assert clone(est).get_params() == params
    est.set_params(boundary="periodic")
    assert est.boundary == "periodic"


def test_not_fitted_and_validation():
    with pytest.raises(NotFittedError):
        FilterDeconvolver([1, 2.3, 1]).transform(np.zeros((1, 10)))
    with pytest.raises(InputError):
        FilterDeconvolver().fit()
    with pytest.raises(InputError):
        check_signals([[1.0, np.nan]])
    assert check_signals([1.0, 2.0]).shape == (1, 2)


def test_fit_transform_in_pipeline():
    X, Y = _blurred_rows([1, 2.3, 1], seed=1)
    pipe = make_pipeline(FilterDeconvolver([1, 2.3, 1]))
    out = pipe.fit_transform(Y)
    assert np.sqrt(np.mean((out - X)[:, 40:-40] ** 2)) <= 1e-8


def test_separable_estimator():
    truth = checkerboard(48, 48, 6)
    k = Kernel2D.outer([1, 2.3, 1], [1, 2.3, 1])
    est = SeparableDeconvolver2D(k.matrix).fit()
    out = est.transform(blur2d(truth, k).pixels)
    assert np.max(np.abs(out - truth.pixels)) <= 1e-8
    assert est.report_.length_loss == (0, 0)


def test_rl_estimator_identity():
    img = checkerboard(16, 16, 4).pixels
    est = RichardsonLucyDeconvolver(psf=[[1.0]], iterations=3).fit()
    assert np.array_equal(est.transform(img), img)
    with pytest.raises(InputError):
        RichardsonLucyDeconvolver().fit()
