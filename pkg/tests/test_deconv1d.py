from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from filtinv.charpoly import Filter, decompose, decomposition_from_params
from filtinv.deconv1d import (
    DeconvOptions,
    DeconvReport,
    Deconvolver,
    build_inverse,
    deconvolve,
    project_out_kernel,
    resolution_report,
)
from filtinv.elementary import invert_elementary, kernel_basis
from filtinv.exceptions import DegenerateBasisError, InputError, NotInvertibleError
from filtinv.signal import Sequence, apply_filter, centered, convolve


def _blur(x, coeffs, policy="reflect"):
    return apply_filter(x, centered(Filter(coeffs).coeffs), policy)


def _signal(n, seed):
    return Sequence(np.random.default_rng(seed).standard_normal(n))


def _build(params):
    c = np.array([1.0])
    for p in params:
        c = np.convolve(c, [1.0, p, 1.0])
    return c


# --- build_inverse -------------------------------------------------------------------

def test_build_inverse_single_factor():
    a = build_inverse(decomposition_from_params([2.3]))
    b = invert_elementary(2.3)
    assert a.z.origin == b.z.origin
    assert np.allclose(a.z.values, b.z.values, rtol=0, atol=1e-15)


def test_build_inverse_product_identity():
    inv = build_inverse(decomposition_from_params([2.3, 5.0]))
    out = convolve(centered(_build([2.3, 5.0])), inv.z)
    e = np.zeros(len(out))
    e[out.origin] = 1.0
    assert np.max(np.abs(out.values - e)[4:-4]) <= 2 * 3 * 1e-12


def test_build_inverse_gain():
    inv = build_inverse(decompose(Filter([2, 4.6, 2])))
    assert inv.z.at(0) == pytest.approx(invert_elementary(2.3).z.at(0) / 2, abs=1e-15)


def test_build_inverse_names_offending_factor():
    with pytest.raises(NotInvertibleError, match="p=1"):
        build_inverse(decomposition_from_params([2.3, 1.0]))


# --- resolution report ------------------------------------------------------------

def test_resolution_no_loss():
    rep = resolution_report(decomposition_from_params([2.3]), 101)
    assert rep.nyquist_before == rep.nyquist_after == Fraction(1, 100)
    assert rep.length_loss == 0 and not rep.degenerate


def test_resolution_one_noninvertible():
    rep = resolution_report(decomposition_from_params([2.3, 1.0]), 101)
    n = 50
    assert rep.nyquist_before == Fraction(1, 2 * n)
    assert rep.nyquist_after == Fraction(1, 2 * n - 2)
    assert rep.length_loss == 2


def test_resolution_two_noninvertible():
    rep = resolution_report(decomposition_from_params([2.0, 1.0]), 101)
    assert rep.length_loss == 4 and rep.nyquist_after == Fraction(1, 96)


def test_resolution_degenerate():
    rep = resolution_report(decomposition_from_params([1.0, 0.5]), 5)
    assert rep.degenerate and rep.nyquist_after is None


def test_report_invariant_enforced():
    with pytest.raises(ValueError):
        DeconvReport(noninvertible_count=1, length_loss=0)


def test_report_to_dict_serializes_fractions():
    d = resolution_report(decomposition_from_params([1.0]), 21).to_dict()
    assert d["nyquist_before"] == "1/20" and d["nyquist_after"] == "1/18"


# --- project_out_kernel --------------------------------------------------------------

def test_project_kernel_vector_vanishes():
    kb = kernel_basis(1.0, 30)
    assert np.max(np.abs(project_out_kernel(kb.k1, kb))) <= 1e-12


def test_project_orthogonal_vector_unchanged():
    kb = kernel_basis(0.5, 30)
    b = np.column_stack(kb.vectors)
    x = np.random.default_rng(0).standard_normal(30)
    x -= b @ np.linalg.lstsq(b, x, rcond=None)[0]
    assert np.max(np.abs(project_out_kernel(x, kb) - x)) <= 1e-12


def test_project_recovers_remainder():
    kb = kernel_basis(-2.0, 40)
    b = np.column_stack(kb.vectors)
    r = np.random.default_rng(1).standard_normal(40)
    r -= b @ np.linalg.lstsq(b, r, rcond=None)[0]
    x = kb.k1 + 0.3 * kb.k2 + r
    assert np.max(np.abs(project_out_kernel(x, kb) - r)) <= 1e-10


def test_project_keeps_sequence_type():
    kb = kernel_basis(1.0, 10)
    out = project_out_kernel(Sequence(np.arange(10.0), origin=4), kb)
    assert isinstance(out, Sequence) and out.origin == 4


def test_project_errors():
    kb = kernel_basis(1.0, 10)
    with pytest.raises(InputError):
        project_out_kernel(np.zeros(9), kb)
    with pytest.raises(DegenerateBasisError):
        project_out_kernel(np.zeros(10), [kb.k1, 2 * kb.k1])


@settings(max_examples=100, deadline=None)
@given(st.floats(-2, 2), st.integers(5, 80), st.integers(0, 2**32 - 1))
def test_projection_idempotent_and_orthogonal(p, n, seed):
    kb = kernel_basis(p, n)
    x = np.random.default_rng(seed).standard_normal(n)
    once = project_out_kernel(x, kb)
    twice = project_out_kernel(once, kb)
    assert np.max(np.abs(once - twice)) <= 1e-12 * max(1.0, np.linalg.norm(x))
    for k in kb.vectors:
        assert abs(once @ k) <= 1e-9 * np.linalg.norm(x) * np.linalg.norm(k)


# --- deconvolve ---------------------------------------------------------------------

def test_invertible_round_trip():
    x = _signal(256, 0)
    out, rep = deconvolve(_blur(x, [1, 2.3, 1]), Filter([1, 2.3, 1]), truth=x)
    assert rep.interior_rms <= 1e-8
    assert len(out) == 256 and rep.length_loss == 0 and not rep.partial


def test_identity_filter_copies():
    x = _signal(50, 1)
    out, rep = deconvolve(x, Filter([1.0]))
    assert np.array_equal(out.values, x.values) and out.origin == x.origin
    assert rep.length_loss == 0 and rep.factors == []


def test_gain_is_divided():
    x = _signal(200, 2)
    _, rep = deconvolve(_blur(x, [2, 4.6, 2]), Filter([2, 4.6, 2]), truth=x)
    assert rep.interior_rms <= 1e-8


def test_oscillatory_round_trip_shortens_signal():
    x = _signal(256, 3)
    out, rep = deconvolve(_blur(x, [1, 1, 1]), Filter([1, 1, 1]), truth=x)
    assert rep.length_loss == 2 and len(out) == 254
    assert out.start == 1 and out.stop == 255
    assert rep.interior_rms <= 1e-8


def test_oscillatory_restoration_is_exact_modulo_kernel():
    x = _signal(128, 4)
    dec = Deconvolver(Filter([1, 1, 1]))
    out, _ = dec.apply(_blur(x, [1, 1, 1]))
    diff = out.values - x.window(out.start, out.stop)
    # whatever differs lies in the kernel (on the interior window)
    m = dec.margin
    inner = diff[m:-m]
    assert np.max(np.abs(dec.project(inner, out.start + m))) <= 1e-8


def test_mixed_filter_round_trip():
    c = _build([2.3, 1.0])
    x = _signal(300, 5)
    out, rep = deconvolve(_blur(x, c), Filter(c), truth=x)
    assert rep.invertible_count == 1 and rep.noninvertible_count == 1
    assert rep.interior_rms <= 1e-8


def test_double_oscillatory_root():
    x = _signal(300, 6)
    out, rep = deconvolve(_blur(x, [1, 2, 3, 2, 1]), Filter([1, 2, 3, 2, 1]), truth=x)
    assert rep.length_loss == 4 and rep.interior_rms <= 1e-8


def test_gaussian_with_complex_pair():
    s = np.arange(-3, 4)
    c = np.exp(-(s**2) / (2 * 1.5**2))
    x = _signal(400, 7)
    _, rep = deconvolve(_blur(x, c), Filter(c), truth=x)
    assert rep.interior_rms <= 1e-8


def test_critical_factor_flags_partial():
    x = _signal(100, 8)
    out, rep = deconvolve(_blur(x, [1, 2, 1]), Filter([1, 2, 1]), truth=x)
    assert rep.partial and rep.critical_count == 1 and rep.length_loss == 2
    assert np.all(np.isfinite(out.values))


@pytest.mark.parametrize("policy", ["zero", "periodic"])
def test_boundary_policies_run(policy):
    x = _signal(200, 9)
    _, rep = deconvolve(_blur(x, [1, 2.3, 1], policy), Filter([1, 2.3, 1]), DeconvOptions(boundary=policy), truth=x)
    assert rep.interior_rms <= 1e-8


def test_too_short_signal():
    with pytest.raises(InputError):
        deconvolve(Sequence([1.0, 2.0, 3.0]), Filter([1, 2.3, 1]))


def test_options_validation():
    with pytest.raises(InputError):
        DeconvOptions(eps_trunc=0)
    with pytest.raises(InputError):
        DeconvOptions(boundary="mirror")


def test_output_keeps_time_alignment():
    x = Sequence(np.random.default_rng(10).standard_normal(120), origin=20)
    out, _ = deconvolve(_blur(x, [1, 1, 1]), Filter([1, 1, 1]))
    assert out.start == x.start + 1


invertible_params = st.lists(
    st.one_of(st.floats(2.05, 6), st.floats(-6, -2.05)), min_size=1, max_size=5
)


@settings(max_examples=40, deadline=None)
@given(invertible_params, st.integers(0, 2**32 - 1))
def test_invertible_round_trip_property(params, seed):
    # 1 / prod(|p| - 2) is the worst-case noise gain; past ~1e5 rounding alone exceeds 1e-8
    assume(np.prod(np.abs(params) - 2.0) >= 1e-5)
    c = _build(params)
    x = _signal(512, seed)
    _, rep = deconvolve(_blur(x, c), Filter(c), truth=x)
    assert rep.interior_rms <= 1e-8


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.one_of(st.floats(2.05, 6), st.floats(-6, -2.05)), max_size=3),
    st.floats(-1.95, 1.95),
    st.integers(0, 2**32 - 1),
)
def test_one_oscillatory_factor_property(params, p, seed):
    c = _build(params + [p])
    x = _signal(512, seed)
    out, rep = deconvolve(_blur(x, c), Filter(c), truth=x)
    assert rep.noninvertible_count == 1 and len(out) == 510
    assert rep.interior_rms <= 1e-8
