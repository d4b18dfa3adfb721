import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from filtinv.elementary import (
    FactorClass,
    classify,
    invert_elementary,
    invert_pair,
    kernel_basis,
    pseudo_inverse,
    pseudo_inverse_bound,
    transfer_matrix,
)
from filtinv.exceptions import InputError, NotInvertibleError, TrivialKernelError, UseKernelPathError


def _apply(p, z):
    """[1, p, 1] * z as an array centred like z, plus the origin."""
    out = np.convolve([1.0, p, 1.0], z.values)
    return out, z.origin + 1


def _unit(n, origin):
    e = np.zeros(n)
    e[origin] = 1.0
    return e


# --- classification ----------------------------------------------------------------

@pytest.mark.parametrize(
    "p,klass",
    [
        (2.3, FactorClass.INVERTIBLE),
        (-3.0, FactorClass.INVERTIBLE),
        (1.0, FactorClass.OSCILLATORY),
        (0.0, FactorClass.OSCILLATORY),
        (2.0, FactorClass.CRITICAL_PLUS),
        (-2.0, FactorClass.CRITICAL_MINUS),
        (2.0 + 1e-10, FactorClass.CRITICAL_PLUS),
        (-2.0 - 5e-10, FactorClass.CRITICAL_MINUS),
        (2.0 + 1e-6, FactorClass.INVERTIBLE),
        (1j, FactorClass.INVERTIBLE),
    ],
)
def test_classify(p, klass):
    assert classify(p) is klass


# --- transfer matrix ---------------------------------------------------------------

def test_transfer_matrix_examples():
    tm = transfer_matrix(2.3)
    assert np.linalg.det(tm.matrix) == pytest.approx(1.0, abs=1e-14)
    u = sorted(np.real(tm.eigenvalues))
    assert u == pytest.approx([-1.7178909, -0.5821091], abs=1e-7)
    tm2 = transfer_matrix(2.0)
    assert tm2.eigenvalues == (-1.0, -1.0) and tm2.defective
    u0 = sorted(transfer_matrix(0.0).eigenvalues, key=lambda z: z.imag)
    assert u0[0] == pytest.approx(-1j) and u0[1] == pytest.approx(1j)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_vieta(p):
    u1, u2 = transfer_matrix(p).eigenvalues
    assert abs(u1 * u2 - 1) <= 1e-12
    assert abs(u1 + u2 + p) <= 1e-12 * max(1.0, abs(p))


# --- exact inverse -----------------------------------------------------------------

@pytest.mark.parametrize(
    "p,z0,u1",
    [
        (2.3, 1 / math.sqrt(1.29), (-2.3 + math.sqrt(1.29)) / 2),
        (5.0, 1 / math.sqrt(21), (-5 + math.sqrt(21)) / 2),
        (-3.0, -1 / math.sqrt(5), (3 - math.sqrt(5)) / 2),
    ],
)
def test_inverse_closed_form(p, z0, u1):
    inv = invert_elementary(p)
    assert inv.z.at(0) == pytest.approx(z0, abs=1e-12)
    assert inv.z.at(1) == pytest.approx(z0 * u1, abs=1e-12)
    assert 2 * inv.z.at(1) + p * inv.z.at(0) == pytest.approx(1.0, abs=1e-12)


def test_inverse_reference_values():
    inv = invert_elementary(2.3)
    assert inv.z.at(0) == pytest.approx(0.8804509, abs=1e-7)
    # the reference value z(1) = -0.5125188 is off in the 7th digit; 2 z(1) + 2.3 z(0) = 1 gives -0.5125185
    assert inv.z.at(1) == pytest.approx((1 - 2.3 * 0.8804509063256) / 2, abs=1e-12)
    assert inv.z.at(1) == pytest.approx(-0.5125188, abs=5e-7)
    assert not inv.pseudo


@pytest.mark.parametrize("p", [2.0, -2.0, 1.0, 0.0, 1.999])
def test_inverse_rejects_noninvertible(p):
    with pytest.raises(NotInvertibleError):
        invert_elementary(p)


def test_inverse_rejects_complex():
    with pytest.raises(InputError):
        invert_elementary(1 + 3j)


inv_p = st.one_of(st.floats(2.01, 40), st.floats(-40, -2.01))


@settings(max_examples=150, deadline=None)
@given(inv_p)
def test_inverse_identity_property(p):
    inv = invert_elementary(p, 1e-12)
    out, origin = _apply(p, inv.z)
    err = out - _unit(len(out), origin)
    # interior: every lag where the truncated ends do not enter
    assert np.max(np.abs(err[2:-2]), initial=0.0) <= 1e-10


@settings(max_examples=150, deadline=None)
@given(inv_p)
def test_inverse_geometric_tail_and_bound(p):
    inv = invert_elementary(p, 1e-12)
    z = inv.z.values
    h = inv.support
    u1 = transfer_matrix(p).eigenvalues[0]
    assert np.array_equal(z, z[::-1])
    for t in range(1, h):
        assert abs(z[h + t + 1] / z[h + t]) == pytest.approx(abs(u1), rel=1e-12)
    assert np.all(np.abs(z[h:]) <= abs(z[h]) * np.abs(u1) ** np.arange(h + 1) * (1 + 1e-12))
    # dropped tail stays below the reported bound
    tail = abs(z[h]) * abs(u1) ** (h + 1) / (1 - abs(u1))
    assert tail <= inv.truncation_bound * (1 + 1e-9)
    assert abs(z[-1]) >= 1e-12 or h == 0


def test_pair_inverse_is_real_and_inverts():
    p = 1.0 + 2.5j
    inv = invert_pair(p)
    f = np.convolve([1, p, 1], [1, np.conj(p), 1]).real
    out = np.convolve(f, inv.z.values)
    err = out - _unit(len(out), inv.z.origin + 2)
    assert np.max(np.abs(err[4:-4])) <= 1e-10


# --- pseudo-inverse ----------------------------------------------------------------

@pytest.mark.parametrize(
    "p,expected",
    [
        (1.0, [0, 0.5, -0.5, 0, 0.5, -0.5]),
        (-1.0, [0, 0.5, 0.5, 0, -0.5, -0.5, 0]),
        (0.0, [0, 0.5, 0, -0.5, 0, 0.5]),
    ],
)
def test_pseudo_inverse_examples(p, expected):
    inv = pseudo_inverse(p, len(expected) - 1)
    got = [inv.z.at(t) for t in range(len(expected))]
    assert got == expected
    assert inv.pseudo and inv.truncation_bound == 0.0
    assert [inv.z.at(-t) for t in range(len(expected))] == expected


@pytest.mark.parametrize("p", [1.0, -1.0])
@pytest.mark.parametrize("half", [1, 2, 7, 100, 1001])
def test_pseudo_inverse_half_bound_exact(p, half):
    z = pseudo_inverse(p, half).z.values
    if half >= 2:
        assert np.max(np.abs(z)) == 0.5


@pytest.mark.parametrize("p", [2.0, -2.0, 2.5])
def test_pseudo_inverse_rejects(p):
    with pytest.raises(UseKernelPathError):
        pseudo_inverse(p, 5)


def test_pseudo_inverse_bad_length():
    with pytest.raises(InputError):
        pseudo_inverse(1.0, 0)


osc_p = st.floats(-1.99, 1.99, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(osc_p, st.integers(2, 300))
def test_pseudo_inverse_bound_property(p, half):
    z = pseudo_inverse(p, half).z.values
    assert np.max(np.abs(z)) <= pseudo_inverse_bound(p) + 1e-12


@settings(max_examples=150, deadline=None)
@given(osc_p, st.integers(3, 200))
def test_pseudo_inverse_solves_on_window(p, half):
    inv = pseudo_inverse(p, half)
    out, origin = _apply(p, inv.z)
    err = out - _unit(len(out), origin)
    lags = np.arange(len(out)) - origin
    inside = np.abs(lags) <= half - 2
    assert np.max(np.abs(err[inside])) <= 1e-10
    # recursion and start condition
    assert inv.z.at(0) == 0.0
    assert 2 * inv.z.at(1) + p * inv.z.at(0) == pytest.approx(1.0, abs=1e-12)


# --- kernel basis ------------------------------------------------------------------

@pytest.mark.parametrize("p", [2.0, -2.0, 1.0, -1.0, 0.5, 0.0, 1.7])
@pytest.mark.parametrize("start", [0, -7, 13])
def test_kernel_annihilated(p, start):
    kb = kernel_basis(p, 40, start)
    assert len(kb.vectors) == 2
    for k in kb.vectors:
        out = np.convolve([1.0, p, 1.0], k, mode="valid")
        assert np.max(np.abs(out)) <= 1e-10 * max(1.0, np.max(np.abs(k)))
    assert np.linalg.matrix_rank(np.column_stack(kb.vectors)) == 2


def test_kernel_explicit_forms():
    n = np.arange(6)
    kb = kernel_basis(-2.0, 6)
    assert kb.k1.tolist() == [1] * 6 and kb.k2.tolist() == n.tolist()
    kb = kernel_basis(2.0, 6)
    assert kb.k1.tolist() == [1, -1, 1, -1, 1, -1]
    assert kb.k2.tolist() == (n * (-1.0) ** n).tolist()
    kb = kernel_basis(1.0, 6)
    assert np.allclose(kb.k1, np.cos(2 * np.pi * n / 3), atol=1e-15)
    assert np.allclose(kb.k2, np.sin(2 * np.pi * n / 3), atol=1e-15)


def test_kernel_errors():
    with pytest.raises(TrivialKernelError):
        kernel_basis(2.3, 10)
    with pytest.raises(InputError):
        kernel_basis(1.0, 2)


@settings(max_examples=100, deadline=None)
@given(st.floats(-2.0, 2.0, allow_nan=False), st.integers(3, 80), st.integers(-50, 50))
def test_kernel_property(p, length, start):
    kb = kernel_basis(p, length, start)
    for k in kb.vectors:
        out = np.convolve([1.0, p, 1.0], k, mode="valid")
        assert np.max(np.abs(out)) <= 1e-10 * max(1.0, np.max(np.abs(k)))
