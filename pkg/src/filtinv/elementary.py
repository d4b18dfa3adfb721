"""Analysis of elementary filters ``[1, p, 1]``.

Every symmetric filter factors into these length-3 filters. Each factor is
classified by ``p``:

* ``|p| > 2``: two real eigenvalues ``u1 * u2 = 1`` off the unit circle. The
  inverse ``z(t) = z(0) u1**|t|`` with ``|u1| < 1`` decays geometrically.
* ``|p| == 2``: a defective double eigenvalue ``-sign(p)``. No bounded inverse.
* ``|p| < 2``: eigenvalues ``exp(+-i phi)`` with ``cos(phi) = -p/2``. The
  bounded, non-decaying solution ``sin(phi |t|) / (2 sin(phi))`` serves as a
  pseudo-inverse, and ``cos(phi n), sin(phi n)`` span the kernel.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, NotInvertibleError, TrivialKernelError, UseKernelPathError
from .signal import Sequence

CLASSIFY_EPS = 1e-9
DEFAULT_EPS_TRUNC = 1e-12


class FactorClass(str, enum.Enum):
    INVERTIBLE = "invertible"
    CRITICAL_PLUS = "critical_plus"
    CRITICAL_MINUS = "critical_minus"
    OSCILLATORY = "oscillatory"

    @property
    def invertible(self) -> bool:
        return self is FactorClass.INVERTIBLE

    @property
    def critical(self) -> bool:
        return self in (FactorClass.CRITICAL_PLUS, FactorClass.CRITICAL_MINUS)


def classify(p, eps: float = CLASSIFY_EPS) -> FactorClass:
    """Invertibility class of ``[1, p, 1]``.

    Values within ``eps`` of ``|p| = 2`` snap to the critical classes so that
    rounding noise cannot flip a defective factor into an invertible one.
    Non-real ``p`` always has its eigenvalues off the unit circle.
    """
    p = complex(p)
    if p.imag != 0.0:
        u1, u2 = _eigenvalues(p)
        if abs(abs(u1) - 1.0) > eps:
            return FactorClass.INVERTIBLE
        return FactorClass.OSCILLATORY
    p = p.real
    if not math.isfinite(p):
        raise InputError(f"non-finite factor parameter {p}")
    gap = abs(p) - 2.0
    if gap > eps:
        return FactorClass.INVERTIBLE
    if gap >= -eps:
        return FactorClass.CRITICAL_PLUS if p > 0 else FactorClass.CRITICAL_MINUS
    return FactorClass.OSCILLATORY


def _eigenvalues(p):
    """Roots of ``u**2 + p u + 1`` ordered so that ``|u1| <= |u2|``."""
    p = complex(p)
    d = cmath.sqrt(p * p - 4.0)
    a = (-p + d) / 2.0
    b = (-p - d) / 2.0
    # the larger root is computed without cancellation; Vieta gives the other
    big = a if abs(a) >= abs(b) else b
    small = 1.0 / big
    return small, big


@dataclass(frozen=True)
class TransferMatrix:
    """State-transition matrix of the recursion ``z(t+1) = -p z(t) - z(t-1)``."""

    p: float
    matrix: np.ndarray
    u1: complex
    u2: complex

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        return self.u1, self.u2

    @property
    def eigenvectors(self) -> np.ndarray:
        """Columns ``(u, 1)``, right eigenvectors acting on ``(z(n), z(n-1))``."""
        return np.array([[self.u1, self.u2], [1.0, 1.0]], dtype=complex)

    @property
    def defective(self) -> bool:
        return abs(self.u1 - self.u2) <= 1e-12 * max(1.0, abs(self.u1))


def transfer_matrix(p: float) -> TransferMatrix:
    p = float(p)
    if not math.isfinite(p):
        raise InputError(f"non-finite factor parameter {p}")
    b = np.array([[-p, 1.0], [-1.0, 0.0]])
    if abs(p) == 2.0:
        u = complex(-math.copysign(1.0, p))
        return TransferMatrix(p, b, u, u)
    u1, u2 = _eigenvalues(p)
    if abs(p) < 2.0:
        # unit-circle pair; order by argument so u1 is the upper half-plane root
        u1, u2 = sorted((u1, u2), key=lambda u: -u.imag)
    return TransferMatrix(p, b, u1, u2)


@dataclass(frozen=True)
class InverseFilter:
    """Finite symmetric (pseudo-)inverse of a filter.

    ``truncation_bound`` bounds the summed magnitude of the dropped samples on
    either side; it is 0 for pseudo-inverses, which are exact on their window.
    """

    z: Sequence
    truncation_bound: float
    pseudo: bool = False
    params: tuple = ()

    @property
    def support(self) -> int:
        """Half-width: ``z(t) = 0`` for ``|t| > support``."""
        return self.z.origin

    def __len__(self) -> int:
        return len(self.z)


def _geometric_inverse(p: complex, eps_trunc: float):
    """Closed-form inverse ``z(t) = z0 u1**|t|`` of ``[1, p, 1]`` as complex samples."""
    u1, _ = _eigenvalues(p)
    z0 = 1.0 / (2.0 * u1 + p)
    r = abs(u1)
    if r == 0.0:
        support = 0
    elif abs(z0) < eps_trunc:
        support = 0
    else:
        # first t with |z0| r**t < eps_trunc
        support = max(0, math.ceil(math.log(eps_trunc / abs(z0)) / math.log(r)))
        while support > 0 and abs(z0) * r ** (support - 1) < eps_trunc:
            support -= 1
        while abs(z0) * r**support >= eps_trunc:
            support += 1
    # sample t = support is the first below the threshold and is dropped
    half = max(support - 1, 0)
    t = np.abs(np.arange(-half, half + 1))
    z = z0 * np.power(complex(u1), t)
    tail = abs(z0) * r ** (half + 1) / (1.0 - r) if r > 0 else 0.0
    return z, half, tail


def invert_elementary(p: float, eps_trunc: float = DEFAULT_EPS_TRUNC) -> InverseFilter:
    """Exact inverse of ``[1, p, 1]`` for ``|p| > 2``, truncated below ``eps_trunc``.

    ``z(0) = 1 / (2 u1 + p)`` where ``u1`` is the root of ``u**2 + p u + 1``
    inside the unit circle; this is the scaling for which
    ``2 z(1) + p z(0) = 1`` holds.
    """
    if eps_trunc <= 0:
        raise InputError(f"eps_trunc must be positive, got {eps_trunc}")
    pc = complex(p)
    if pc.imag != 0.0:
        raise InputError("complex factors are inverted in conjugate pairs; use invert_pair")
    p = pc.real
    if classify(p) is not FactorClass.INVERTIBLE:
        raise NotInvertibleError([p])
    z, half, bound = _geometric_inverse(p, eps_trunc)
    return InverseFilter(Sequence(z.real, origin=half), bound, pseudo=False, params=(p,))


def invert_pair(p: complex, eps_trunc: float = DEFAULT_EPS_TRUNC) -> InverseFilter:
    """Inverse of the real length-5 filter ``[1, p, 1] * [1, conj(p), 1]``.

    Each complex factor is inverted by the same closed form and the two
    inverses are convolved; the product is real up to rounding.
    """
    p = complex(p)
    if classify(p) is not FactorClass.INVERTIBLE:
        raise NotInvertibleError([p, p.conjugate()])
    za, ha, ba = _geometric_inverse(p, eps_trunc / 4.0)
    zb, hb, bb = _geometric_inverse(p.conjugate(), eps_trunc / 4.0)
    z = np.convolve(za, zb)
    scale = max(1.0, float(np.max(np.abs(z))))
    if np.max(np.abs(z.imag)) > 1e-10 * scale:
        raise NotInvertibleError([p, p.conjugate()])
    bound = ba * float(np.sum(np.abs(zb))) + bb * float(np.sum(np.abs(za)))
    z, half, dropped = trim_tails(z.real, ha + hb, eps_trunc)
    return InverseFilter(Sequence(z, origin=half), bound + dropped, pseudo=False, params=(p, p.conjugate()))


def trim_tails(z: np.ndarray, half: int, eps_trunc: float):
    """Drop the symmetric tails of ``z`` (centre index ``half``) where every sample is below ``eps_trunc``.

    Returns the trimmed samples, the new half-width and the summed magnitude
    dropped on one side.
    """
    mag = np.maximum(np.abs(z[half:]), np.abs(z[half::-1]))
    keep = np.nonzero(mag >= eps_trunc)[0]
    new_half = int(keep[-1]) if keep.size else 0
    dropped = float(np.sum(mag[new_half + 1 :]))
    return z[half - new_half : half + new_half + 1], new_half, dropped


def pseudo_inverse(p: float, half_length: int) -> InverseFilter:
    """Bounded two-sided solution of ``[1, p, 1] * z = I`` for ``|p| < 2``.

    ``z(t) = sin(phi |t|) / (2 sin phi)`` with ``cos(phi) = -p/2`` and
    ``z(0) = 0``; every ``|z(t)|`` stays below ``1 / (2 sin phi)``.
    The convolution with ``[1, p, 1]`` equals ``I`` for ``|t| < half_length``.
    """
    p = float(p)
    half_length = int(half_length)
    if half_length < 1:
        raise InputError(f"half_length must be >= 1, got {half_length}")
    if classify(p) is not FactorClass.OSCILLATORY:
        raise UseKernelPathError(
            f"p={p:g}: no bounded pseudo-inverse for |p| >= 2; use kernel projection"
        )
    t = np.arange(half_length + 1)
    if p.is_integer():
        # p in {-1, 0, 1}: the recursion is exact in floating point
        half = np.empty(half_length + 1)
        half[0] = 0.0
        half[1] = 0.5
        for k in range(1, half_length):
            half[k + 1] = -p * half[k] - half[k - 1]
    else:
        phi = math.acos(-p / 2.0)
        half = np.sin(phi * t) / (2.0 * math.sin(phi))
    z = np.concatenate([half[:0:-1], half])
    return InverseFilter(Sequence(z, origin=half_length), 0.0, pseudo=True, params=(p,))


def pseudo_inverse_bound(p: float) -> float:
    """``1 / (2 sin phi)``: the sup-norm of the pseudo-inverse of ``[1, p, 1]``."""
    phi = math.acos(-float(p) / 2.0)
    return 1.0 / (2.0 * math.sin(phi))


@dataclass(frozen=True)
class KernelBasis:
    """Two sequences spanning the solutions of ``x(n-1) + p x(n) + x(n+1) = 0``."""

    k1: np.ndarray
    k2: np.ndarray
    p: float

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self.k1, self.k2]

    def __len__(self) -> int:
        return len(self.k1)


def kernel_basis(p: float, length: int, start: int = 0) -> KernelBasis:
    """Kernel of convolution with ``[1, p, 1]`` sampled at ``n = start .. start+length-1``."""
    p = float(p)
    length = int(length)
    if length < 3:
        raise InputError(f"kernel window needs length >= 3, got {length}")
    klass = classify(p)
    n = np.arange(start, start + length, dtype=float)
    if klass is FactorClass.INVERTIBLE:
        raise TrivialKernelError(f"p={p:g}: [1, p, 1] is invertible, its kernel is trivial")
    if klass is FactorClass.CRITICAL_MINUS:
        k1, k2 = np.ones(length), n
    elif klass is FactorClass.CRITICAL_PLUS:
        alt = np.where(np.arange(start, start + length) % 2 == 0, 1.0, -1.0)
        k1, k2 = alt, n * alt
    else:
        phi = math.acos(-p / 2.0)
        k1, k2 = np.cos(phi * n), np.sin(phi * n)
    return KernelBasis(k1, k2, p)
