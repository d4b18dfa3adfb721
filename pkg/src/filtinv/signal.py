"""Sequences, images, boundary extension, convolution and error metrics.

A :class:`Sequence` carries an explicit ``origin``: ``values[i]`` is the sample
at time ``t = i - origin``. Convolution adds origins, so asymmetric
intermediates such as ``[1, 1]`` compose without manual bookkeeping.
Trimmed deconvolution outputs may start after ``t = 0``; their origin is then
negative.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError


class BoundaryPolicy(str, enum.Enum):
    """How a finite signal is continued past its ends."""

    REFLECT = "reflect"
    ZERO = "zero"
    PERIODIC = "periodic"

    @classmethod
    def coerce(cls, value) -> "BoundaryPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(
                f"unknown boundary policy {value!r}; expected one of "
                f"{[p.value for p in cls]}"
            ) from None


_NUMPY_PAD_MODE = {
    BoundaryPolicy.REFLECT: "reflect",
    BoundaryPolicy.ZERO: "constant",
    BoundaryPolicy.PERIODIC: "wrap",
}


def _frozen(values, ndim):
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InputError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError("empty data")
    if not np.all(np.isfinite(arr)):
        raise InputError("data contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sequence:
    values: np.ndarray
    origin: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 1))
        object.__setattr__(self, "origin", int(self.origin))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def start(self) -> int:
        """Time index of ``values[0]``."""
        return -self.origin

    @property
    def stop(self) -> int:
        """One past the time index of the last sample."""
        return len(self.values) - self.origin

    def times(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def at(self, t: int) -> float:
        """Sample at time ``t``; zero outside the stored support."""
        i = t + self.origin
        if 0 <= i < len(self.values):
            return float(self.values[i])
        return 0.0

    def window(self, start: int, stop: int) -> np.ndarray:
        """Samples for times ``start <= t < stop``, zero-filled outside the support."""
        out = np.zeros(stop - start)
        lo, hi = max(start, self.start), min(stop, self.stop)
        if lo < hi:
            out[lo - start : hi - start] = self.values[lo + self.origin : hi + self.origin]
        return out

    def __repr__(self) -> str:
        return f"Sequence({self.values.tolist()!r}, origin={self.origin})"


@dataclass(frozen=True, eq=False)
class Image:
    """Grayscale image; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _frozen(self.pixels, 2))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __repr__(self) -> str:
        return f"Image(width={self.width}, height={self.height})"


def unitary() -> Sequence:
    """The identity for convolution: 1 at t = 0, zero elsewhere."""
    return Sequence([1.0], origin=0)


def centered(values) -> Sequence:
    """Odd-length sequence with its origin at the middle sample."""
    values = np.asarray(values, dtype=float)
    if len(values) % 2 != 1:
        raise InputError(f"centered sequence needs odd length, got {len(values)}")
    return Sequence(values, origin=len(values) // 2)


def convolve(a: Sequence, b: Sequence) -> Sequence:
    """Full linear convolution ``(a * b)(t) = sum_k a(k) b(t - k)``."""
    return Sequence(np.convolve(a.values, b.values), origin=a.origin + b.origin)


def extend(x: Sequence, policy=BoundaryPolicy.REFLECT, pad: int = 0, repeat: bool = False) -> Sequence:
    """Continue ``x`` by ``pad`` samples on both sides.

    ``REFLECT`` mirrors about the edge sample without repeating it,
    ``ZERO`` pads with zeros and ``PERIODIC`` wraps around. A pad longer
    than the data is an error unless ``repeat`` is set, in which case the
    mirroring or wrapping is applied again as often as needed.
    """
    policy = BoundaryPolicy.coerce(policy)
    pad = int(pad)
    if pad < 0:
        raise InputError(f"pad must be >= 0, got {pad}")
    if policy is BoundaryPolicy.REFLECT and len(x) == 1 and pad > 0:
        raise InputError("insufficient data: cannot reflect a single sample")
    if not repeat and policy is not BoundaryPolicy.ZERO and pad > len(x) - 1:
        raise InputError(
            f"insufficient data: {policy.value} extension by {pad} needs at least "
            f"{pad + 1} samples, got {len(x)}"
        )
    if pad == 0:
        return x
    values = np.pad(x.values, pad, mode=_NUMPY_PAD_MODE[policy])
    return Sequence(values, origin=x.origin + pad)


def extend2d(img: np.ndarray, policy, pad_rows: int, pad_cols: int) -> np.ndarray:
    policy = BoundaryPolicy.coerce(policy)
    h, w = img.shape
    if policy is not BoundaryPolicy.ZERO and (pad_rows > h - 1 or pad_cols > w - 1):
        raise InputError(
            f"insufficient data: {policy.value} extension by ({pad_rows}, {pad_cols}) "
            f"on a {h}x{w} image"
        )
    return np.pad(img, ((pad_rows, pad_rows), (pad_cols, pad_cols)), mode=_NUMPY_PAD_MODE[policy])


def apply_filter(x: Sequence, f: Sequence, policy=BoundaryPolicy.REFLECT) -> Sequence:
    """Filter ``x`` with ``f`` keeping the support of ``x``.

    The signal is extended by the reach of ``f`` so the output has one sample
    per input sample.
    """
    left = f.origin
    right = len(f) - 1 - f.origin
    pad = max(left, right)
    ext = extend(x, policy, pad)
    full = convolve(ext, f)
    lo = x.start - full.start
    return Sequence(full.values[lo : lo + len(x)], origin=x.origin)


def rms(a, b) -> float:
    """Root-mean-square difference of two equally shaped signals or images."""
    av = _raw(a)
    bv = _raw(b)
    if av.shape != bv.shape:
        raise InputError(f"shape mismatch: {av.shape} vs {bv.shape}")
    return float(np.sqrt(np.mean((av - bv) ** 2)))


def _raw(x) -> np.ndarray:
    if isinstance(x, Sequence):
        return x.values
    if isinstance(x, Image):
        return x.pixels
    return np.asarray(x, dtype=float)
