"""Separable 2D kernels: rank-1 factorization and row/column deconvolution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charpoly import Filter
from .deconv1d import DeconvOptions, DeconvReport, Deconvolver, build_inverse
from .exceptions import InputError, NotSeparableError
from .signal import Image, Sequence, extend2d, rms

SEPARABLE_TOL = 1e-8
KERNEL_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Kernel2D:
    """Point-symmetric 2D kernel with odd height and width, centred origin."""

    matrix: np.ndarray

    def __post_init__(self):
        k = np.array(self.matrix, dtype=float)
        if k.ndim != 2 or k.shape[0] % 2 != 1 or k.shape[1] % 2 != 1:
            raise InputError(f"2D kernel needs odd height and width, got shape {k.shape}")
        if not np.all(np.isfinite(k)):
            raise InputError("2D kernel contains non-finite values")
        scale = float(np.max(np.abs(k)))
        if scale == 0.0:
            raise InputError("2D kernel is identically zero")
        if np.max(np.abs(k - k[::-1, ::-1])) > KERNEL_SYMMETRY_RTOL * scale:
            raise InputError("2D kernel is not symmetric under (s, t) -> (-s, -t)")
        k.setflags(write=False)
        object.__setattr__(self, "matrix", k)

    @classmethod
    def outer(cls, cs, ct) -> "Kernel2D":
        cs = cs.coeffs if isinstance(cs, Filter) else np.asarray(cs, dtype=float)
        ct = ct.coeffs if isinstance(ct, Filter) else np.asarray(ct, dtype=float)
        return cls(np.outer(cs, ct))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def normalized(self) -> "Kernel2D":
        return Kernel2D(self.matrix / self.matrix.sum())


@dataclass(frozen=True)
class SeparableFactors:
    cs: Filter  # column direction, varies with the row index s
    ct: Filter  # row direction, varies with the column index t
    residual: float


def separate(k: Kernel2D, tol: float = SEPARABLE_TOL) -> SeparableFactors:
    """Best rank-1 factorization ``k[s, t] = cs[s] * ct[t]``.

    Uses the dominant singular triple. Both factors get a positive centre
    coefficient where possible, and the scale is split so that ``cs`` and
    ``ct`` have end coefficients of equal magnitude.
    """
    if not isinstance(k, Kernel2D):
        k = Kernel2D(k)
    m = k.matrix
    u, sv, vt = np.linalg.svd(m)
    total = float(np.linalg.norm(m))
    residual = float(np.sqrt(max(np.sum(sv[1:] ** 2), 0.0))) / total
    a, b = u[:, 0], vt[0]
    # singular vectors of a point-symmetric rank-1 kernel are symmetric or antisymmetric together
    a, b = 0.5 * (a + a[::-1]), 0.5 * (b + b[::-1])
    if not np.any(a) or not np.any(b):
        raise NotSeparableError(1.0, tol)
    if a[len(a) // 2] < 0:
        a = -a
    if b[len(b) // 2] < 0:
        b = -b
    approx = np.outer(a, b)
    sigma = float(np.sum(approx * m) / np.sum(approx * approx))
    residual = max(residual, float(np.linalg.norm(m - sigma * approx)) / total)
    if residual > tol:
        raise NotSeparableError(residual, tol)
    fa, fb = Filter(a), Filter(b)
    ga, gb = abs(fa.gain), abs(fb.gain)
    scale_a = np.sqrt(abs(sigma) * gb / ga)
    cs = Filter(fa.coeffs * scale_a * np.sign(sigma))
    ct = Filter(fb.coeffs * abs(sigma) / scale_a)
    if cs.coeffs[cs.order] < 0 and ct.coeffs[ct.order] < 0:
        cs, ct = Filter(-cs.coeffs), Filter(-ct.coeffs)
    return SeparableFactors(cs, ct, residual)


@dataclass
class Deconv2DReport:
    rows: DeconvReport
    columns: DeconvReport
    offset: tuple[int, int] = (0, 0)
    margin: tuple[int, int] = (0, 0)
    interior_rms: float | None = None

    @property
    def length_loss(self) -> tuple[int, int]:
        return self.columns.length_loss, self.rows.length_loss

    @property
    def partial(self) -> bool:
        return self.rows.partial or self.columns.partial

    def interior(self, pixels: np.ndarray) -> np.ndarray:
        (mr, mc) = self.margin
        h, w = pixels.shape
        return pixels[mr : h - mr, mc : w - mc]

    def to_dict(self) -> dict:
        return {
            "rows": self.rows.to_dict(),
            "columns": self.columns.to_dict(),
            "offset": list(self.offset),
            "margin": list(self.margin),
            "interior_rms": self.interior_rms,
        }


def _pixels(img) -> np.ndarray:
    return img.pixels if isinstance(img, Image) else np.asarray(img, dtype=float)


def _deconvolve_axis(pixels: np.ndarray, dec: Deconvolver) -> tuple[np.ndarray, DeconvReport]:
    rows = []
    report = None
    for row in pixels:
        out, rep = dec.apply(Sequence(row))
        rows.append(out.values)
        report = report or rep
    return np.vstack(rows), report


class SeparableDeconvolver:
    """Precomputed 2D deconvolution for one separable kernel."""

    def __init__(self, k, options: DeconvOptions | None = None, tol: float = SEPARABLE_TOL):
        self.options = options or DeconvOptions()
        if isinstance(k, SeparableFactors):
            self.factors = k
        else:
            self.factors = separate(k if isinstance(k, Kernel2D) else Kernel2D(k), tol)
        self.row_deconvolver = Deconvolver(self.factors.ct, self.options)
        self.column_deconvolver = Deconvolver(self.factors.cs, self.options)

    def apply(self, img, truth=None, order: str = "rows-first") -> tuple[Image, Deconv2DReport]:
        x = _pixels(img)
        h, w = x.shape
        rd, cd = self.row_deconvolver, self.column_deconvolver
        if w <= 2 * rd.order + 1 or h <= 2 * cd.order + 1:
            raise InputError(f"image {w}x{h} too small for kernel {self.factors.cs.order}/{self.factors.ct.order}")
        if order == "rows-first":
            x, row_rep = _deconvolve_axis(x, rd)
            xt, col_rep = _deconvolve_axis(x.T, cd)
            x = xt.T
        elif order == "columns-first":
            xt, col_rep = _deconvolve_axis(x.T, cd)
            x, row_rep = _deconvolve_axis(xt.T, rd)
        else:
            raise InputError(f"unknown axis order {order!r}")
        report = Deconv2DReport(
            rows=row_rep,
            columns=col_rep,
            offset=(col_rep.offset, row_rep.offset),
            margin=(cd.margin, rd.margin),
        )
        mr = min(cd.margin, max((x.shape[0] - 1) // 2, 0))
        mc = min(rd.margin, max((x.shape[1] - 1) // 2, 0))
        report.margin = (mr, mc)
        if truth is not None:
            report.interior_rms = compare_interior(x, truth, report, rd, cd)
        return Image(x), report


def compare_interior(
    restored: np.ndarray,
    truth,
    report: Deconv2DReport,
    row_deconvolver: Deconvolver | None = None,
    column_deconvolver: Deconvolver | None = None,
) -> float:
    """RMS against ``truth`` on the interior window of a 2D result.

    When the deconvolvers are given, the reference is projected with the
    same row and column kernels first, so a result that is exact modulo the
    kernel scores zero.
    """
    t = _pixels(truth)
    (orow, ocol) = report.offset
    h, w = restored.shape
    ref = report.interior(t[orow : orow + h, ocol : ocol + w])
    if row_deconvolver is not None and column_deconvolver is not None:
        (mr, mc) = report.margin
        ref = np.vstack([row_deconvolver.project(r, ocol + mc) for r in ref])
        ref = np.vstack([column_deconvolver.project(c, orow + mr) for c in ref.T]).T
    return rms(report.interior(restored), ref)


def deconvolve2d(img, k, options: DeconvOptions | None = None, truth=None):
    """Deconvolve a separable blur: 1D restoration along every row, then every column."""
    return SeparableDeconvolver(k, options).apply(img, truth)


def inverse_kernel2d(k, eps_trunc: float | None = None) -> np.ndarray:
    """Explicit 2D inverse ``ZS (outer) ZT`` of an invertible separable kernel."""
    sf = k if isinstance(k, SeparableFactors) else separate(k if isinstance(k, Kernel2D) else Kernel2D(k))
    opts = DeconvOptions() if eps_trunc is None else DeconvOptions(eps_trunc=eps_trunc)
    d_s = Deconvolver(sf.cs, opts).decomposition
    d_t = Deconvolver(sf.ct, opts).decomposition
    zs = build_inverse(d_s, opts.eps_trunc).z.values
    zt = build_inverse(d_t, opts.eps_trunc).z.values
    return np.outer(zs, zt)


def convolve2d_same(img, kernel: np.ndarray, policy="reflect") -> np.ndarray:
    """2D convolution keeping the image shape, with boundary extension."""
    from scipy.signal import convolve2d

    x = _pixels(img)
    kernel = np.asarray(kernel, dtype=float)
    pr, pc = kernel.shape[0] // 2, kernel.shape[1] // 2
    ext = extend2d(x, policy, pr, pc)
    return convolve2d(ext, kernel, mode="valid")


def blur2d(img, k, policy="reflect") -> Image:
    """Blur an image with a 2D kernel (same-size output)."""
    m = k.matrix if isinstance(k, Kernel2D) else np.asarray(k, dtype=float)
    return Image(convolve2d_same(img, m, policy))
