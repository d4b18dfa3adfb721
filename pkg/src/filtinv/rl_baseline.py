"""Richardson-Lucy deconvolution, the iterative baseline for comparisons."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .deconv1d import DeconvOptions
from .exceptions import InputError
from .separable2d import Kernel2D, SeparableDeconvolver, _pixels, convolve2d_same
from .signal import BoundaryPolicy, Image, rms

DEFAULT_ITERATIONS = 50


@dataclass(frozen=True)
class RLOptions:
    iterations: int = DEFAULT_ITERATIONS
    guard_eps: float = 1e-12
    clamp_nonnegative: bool = True
    boundary: BoundaryPolicy = BoundaryPolicy.REFLECT

    def __post_init__(self):
        if self.iterations < 1:
            raise InputError(f"iterations must be >= 1, got {self.iterations}")
        if not self.guard_eps > 0:
            raise InputError(f"guard_eps must be positive, got {self.guard_eps}")
        object.__setattr__(self, "boundary", BoundaryPolicy.coerce(self.boundary))


def _psf_matrix(psf) -> np.ndarray:
    m = psf.matrix if isinstance(psf, Kernel2D) else np.asarray(psf, dtype=float)
    if m.ndim != 2:
        raise InputError(f"psf must be 2-d, got shape {m.shape}")
    if np.any(m < 0):
        raise InputError("psf has negative entries")
    total = m.sum()
    if not total > 0:
        raise InputError("psf must have a positive sum")
    return m / total


def richardson_lucy(y, psf, options: RLOptions | None = None) -> Image:
    """Multiplicative update ``x <- x * (psf_mirror (*) (y / (psf (*) x)))`` from ``x = y``."""
    opts = options or RLOptions()
    obs = _pixels(y)
    if np.any(obs < 0):
        raise InputError("observed image has negative pixels")
    k = _psf_matrix(psf)
    k_mirror = k[::-1, ::-1]
    x = obs.copy()
    for _ in range(opts.iterations):
        blurred = convolve2d_same(x, k, opts.boundary)
        ratio = obs / np.maximum(blurred, opts.guard_eps)
        x = x * convolve2d_same(ratio, k_mirror, opts.boundary)
        if opts.clamp_nonnegative:
            np.maximum(x, 0.0, out=x)
    return Image(x)


@dataclass
class Comparison:
    rms_blurred: float
    rms_direct: float
    rms_rl: float
    iterations: int
    window: tuple[int, int, int, int]  # row start/stop, column start/stop
    length_loss: tuple[int, int]
    partial: bool
    runtimes: dict
    direct: Image
    rl: Image

    def to_dict(self, runtimes: bool = True) -> dict:
        out = {
            "rmsBlurred": self.rms_blurred,
            "rmsDirect": self.rms_direct,
            "rmsRL": self.rms_rl,
            "iterations": self.iterations,
            "window": list(self.window),
            "lengthLoss": list(self.length_loss),
            "partial": self.partial,
        }
        if runtimes:
            out["runtimes"] = dict(self.runtimes)
        return out


def compare_methods(
    truth,
    y,
    psf,
    rl_options: RLOptions | None = None,
    deconv_options: DeconvOptions | None = None,
    direct_psf=None,
) -> Comparison:
    """Run direct and Richardson-Lucy deconvolution on ``y`` and score both against ``truth``.

    RMS values are taken over the common window: the direct output domain
    (which shrinks by the length loss) minus the filter order at each end.
    ``direct_psf`` overrides the kernel handed to the direct method (the
    default is ``psf`` itself; RL always uses ``psf`` normalized to sum 1).
    """
    t = _pixels(truth)
    obs = _pixels(y)
    if t.shape != obs.shape:
        raise InputError(f"shape mismatch: truth {t.shape} vs observed {obs.shape}")
    rl_opts = rl_options or RLOptions()

    start = time.perf_counter()
    direct = SeparableDeconvolver(psf if direct_psf is None else direct_psf, deconv_options)
    restored, report = direct.apply(obs)
    t_direct = time.perf_counter() - start

    start = time.perf_counter()
    rl = richardson_lucy(obs, psf, rl_opts)
    t_rl = time.perf_counter() - start

    orow, ocol = report.offset
    mr = direct.column_deconvolver.order
    mc = direct.row_deconvolver.order
    h, w = restored.shape
    rows = slice(orow + mr, orow + h - mr)
    cols = slice(ocol + mc, ocol + w - mc)
    direct_win = restored.pixels[mr : h - mr, mc : w - mc]
    return Comparison(
        rms_blurred=rms(obs[rows, cols], t[rows, cols]),
        rms_direct=rms(direct_win, t[rows, cols]),
        rms_rl=rms(rl.pixels[rows, cols], t[rows, cols]),
        iterations=rl_opts.iterations,
        window=(rows.start, rows.stop, cols.start, cols.stop),
        length_loss=report.length_loss,
        partial=report.partial,
        runtimes={"direct": t_direct, "rl": t_rl},
        direct=restored,
        rl=rl,
    )
