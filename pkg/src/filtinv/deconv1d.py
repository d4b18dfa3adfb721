"""Direct deconvolution of 1D signals.

The filter is split into its invertible and non-invertible elementary
factors. The invertible part is undone exactly by its (truncated) inverse.
Oscillatory factors are undone by their bounded pseudo-inverse, which is exact
up to an element of the factor's kernel; critical factors (``|p| = 2``) are
left in place. The kernel span of all non-invertible factors is then
projected out, and the output loses ``trim_per_noninvertible`` samples per
factor at each end. The result equals the original signal modulo the kernel.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .charpoly import Decomposition, Filter, decompose, reconvolve
from .elementary import (
    DEFAULT_EPS_TRUNC,
    FactorClass,
    InverseFilter,
    KernelBasis,
    invert_elementary,
    invert_pair,
    kernel_basis,
    pseudo_inverse,
    trim_tails,
)
from .exceptions import DegenerateBasisError, InputError, NotInvertibleError
from .signal import BoundaryPolicy, Sequence, centered, convolve, extend, rms


@dataclass(frozen=True)
class DeconvOptions:
    eps_trunc: float = DEFAULT_EPS_TRUNC
    boundary: BoundaryPolicy = BoundaryPolicy.REFLECT
    trim_per_noninvertible: int = 1

    def __post_init__(self):
        if not self.eps_trunc > 0:
            raise InputError(f"eps_trunc must be positive, got {self.eps_trunc}")
        if self.trim_per_noninvertible < 0:
            raise InputError("trim_per_noninvertible must be >= 0")
        object.__setattr__(self, "boundary", BoundaryPolicy.coerce(self.boundary))


@dataclass
class DeconvReport:
    """Summary of a deconvolution run.

    ``offset`` is the number of samples removed from the start of the signal,
    ``margin`` the number of output samples at each end excluded from the
    interior window where ``interior_rms`` is measured.
    """

    factors: list[dict] = field(default_factory=list)
    gain: float = 1.0
    invertible_count: int = 0
    noninvertible_count: int = 0
    critical_count: int = 0
    length_loss: int = 0
    signal_length: int = 0
    nyquist_before: Fraction | None = None
    nyquist_after: Fraction | None = None
    degenerate: bool = False
    partial: bool = False
    inverse_support: int = 0
    offset: int = 0
    margin: int = 0
    interior_rms: float | None = None

    def __post_init__(self):
        if self.length_loss != 2 * self.noninvertible_count:
            raise ValueError("length_loss must equal 2 * noninvertible_count")

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("nyquist_before", "nyquist_after"):
            if out[key] is not None:
                out[key] = str(out[key])
        return out


def _factor_summary(d: Decomposition) -> list[dict]:
    out = []
    for f in d.factors:
        p = f.value
        out.append(
            {
                "p": [p.real, p.imag] if isinstance(p, complex) else p,
                "class": f.klass.value,
            }
        )
    return out


def resolution_report(d: Decomposition, signal_len: int) -> DeconvReport:
    """Resolution accounting for a signal of ``signal_len`` samples.

    A lattice of ``2N + 1`` samples resolves frequencies up to ``N``, a
    Nyquist interval of ``1 / (2N)``. Each non-invertible factor removes one
    frequency pair (a two-dimensional kernel), so ``N`` drops by one.
    """
    n = (int(signal_len) - 1) // 2
    m = d.noninvertible_count
    before = Fraction(1, 2 * n) if n > 0 else None
    degenerate = m >= n
    after = None if degenerate else Fraction(1, 2 * (n - m))
    return DeconvReport(
        factors=_factor_summary(d),
        gain=d.gain,
        invertible_count=d.invertible_count,
        noninvertible_count=m,
        critical_count=d.count(lambda k: k.critical),
        length_loss=2 * m,
        signal_length=int(signal_len),
        nyquist_before=before,
        nyquist_after=after,
        degenerate=degenerate,
    )


def build_inverse(d: Decomposition, eps_trunc: float = DEFAULT_EPS_TRUNC) -> InverseFilter:
    """Exact inverse of a fully invertible decomposition, scaled by ``1 / gain``."""
    bad = [f.value for f in d.factors if not f.klass.invertible]
    if bad:
        raise NotInvertibleError(bad)
    z = centered([1.0 / d.gain])
    bound = 0.0
    for i, f in enumerate(d.factors):
        if f.is_real:
            inv = invert_elementary(f.p.real, eps_trunc)
        elif f.p.imag > 0:
            inv = invert_pair(f.p, eps_trunc)
        else:
            continue
        bound = bound + inv.truncation_bound * (1.0 + float(np.sum(np.abs(z.values))))
        z = convolve(z, inv.z)
    # a dropped sample returns through C amplified by up to sum|c|
    scale = max(1.0, float(np.sum(np.abs(reconvolve(d).coeffs))))
    values, half, dropped = trim_tails(z.values, z.origin, eps_trunc / scale)
    return InverseFilter(Sequence(values, origin=half), bound + dropped, pseudo=False, params=tuple(d.params))


def _group_noninvertible(d: Decomposition, tol: float = 1e-6):
    """``[(p, multiplicity)]`` for the non-invertible factors, near-equal values merged."""
    groups: list[list[float]] = []
    for f in d.factors:
        if f.klass.invertible:
            continue
        p = f.p.real
        for g in groups:
            if abs(g[0] - p) <= tol * (1.0 + abs(p)):
                g.append(p)
                break
        else:
            groups.append([p])
    return [(g[0], len(g)) for g in groups]


def joint_kernel_basis(groups, start: int, stop: int, scale_window=None) -> list[np.ndarray]:
    """Basis of the joint kernel of several non-invertible factors on ``[start, stop)``.

    ``groups`` is a list of ``(p, multiplicity)``. A factor of multiplicity
    ``r`` contributes its two kernel sequences times ``s**j`` for ``j < r``,
    where ``s`` is the sample index centred and scaled on ``scale_window``
    (default: the window itself).
    """
    ref_start, ref_stop = scale_window if scale_window is not None else (start, stop)
    n = np.arange(start, stop, dtype=float)
    center = (ref_start + ref_stop - 1) / 2.0
    half = max((ref_stop - ref_start - 1) / 2.0, 1.0)
    s = (n - center) / half
    vectors = []
    for p, mult in groups:
        kb = kernel_basis(p, stop - start, start)
        for j in range(mult):
            vectors.extend(v * s**j for v in kb.vectors)
    return vectors


def _basis_matrix(kb) -> np.ndarray:
    if isinstance(kb, KernelBasis):
        vecs = kb.vectors
    else:
        vecs = []
        for item in kb:
            vecs.extend(item.vectors if isinstance(item, KernelBasis) else [item])
    return np.column_stack([np.asarray(v, dtype=float) for v in vecs])


def project_out_kernel(x, kb, cond_tol: float = 1e-8):
    """Orthogonal projection of ``x`` onto the complement of the kernel span.

    ``kb`` is a :class:`KernelBasis` or a list of bases / raw vectors; all
    must have the length of ``x``. Returns the same type as ``x``.
    """
    values = x.values if isinstance(x, Sequence) else np.asarray(x, dtype=float)
    b = _basis_matrix(kb)
    if b.shape[0] != len(values):
        raise InputError(f"kernel basis length {b.shape[0]} != signal length {len(values)}")
    if b.shape[1] >= b.shape[0]:
        raise InputError(
            f"window of {b.shape[0]} samples cannot separate a {b.shape[1]}-dimensional kernel"
        )
    norms = np.linalg.norm(b, axis=0)
    if np.any(norms == 0):
        raise DegenerateBasisError("kernel basis contains a zero vector on this window")
    b = b / norms
    sv = np.linalg.svd(b, compute_uv=False)
    if sv[-1] < cond_tol * sv[0]:
        raise DegenerateBasisError(
            f"kernel basis is numerically collinear on this window (sigma_min/sigma_max={sv[-1] / sv[0]:.2e})"
        )
    q, _ = np.linalg.qr(b)
    out = values - q @ (q.T @ values)
    # a second pass removes what rounding left in the span
    out = out - q @ (q.T @ out)
    if isinstance(x, Sequence):
        return Sequence(out, origin=x.origin)
    return out


class Deconvolver:
    """Precomputed deconvolution for one filter; apply it to many signals."""

    def __init__(self, f, options: DeconvOptions | None = None):
        self.options = options or DeconvOptions()
        if isinstance(f, Decomposition):
            self.decomposition = f
        else:
            self.decomposition = decompose(f if isinstance(f, Filter) else Filter(f))
        d = self.decomposition
        self.order = d.order
        inv = Decomposition(1.0, tuple(x for x in d.factors if x.klass.invertible))
        self.inverse = build_inverse(inv, self.options.eps_trunc) if inv.factors else None
        self.oscillatory = [x.p.real for x in d.factors if x.klass is FactorClass.OSCILLATORY]
        self.groups = _group_noninvertible(d)
        self.m = d.noninvertible_count
        self._pseudo_cache: dict[int, list[InverseFilter]] = {}

    @property
    def inverse_support(self) -> int:
        return self.inverse.support if self.inverse is not None else 0

    @property
    def trim(self) -> int:
        return self.m * self.options.trim_per_noninvertible

    @property
    def margin(self) -> int:
        """Samples at each end of the output excluded from the interior window."""
        return self.inverse_support + self.order

    def project(self, values: np.ndarray, start: int = 0) -> np.ndarray:
        """Remove this filter's kernel components from samples at ``start .. start+len-1``."""
        values = np.asarray(values, dtype=float)
        if not self.groups:
            return values
        basis = joint_kernel_basis(self.groups, start, start + len(values))
        return project_out_kernel(values, basis)

    def _pseudo_inverses(self, length: int) -> list[InverseFilter]:
        if length not in self._pseudo_cache:
            # long enough that [1, p, 1] * z = I at every lag inside the signal
            self._pseudo_cache[length] = [pseudo_inverse(p, length + 2) for p in self.oscillatory]
        return self._pseudo_cache[length]

    def apply(self, y: Sequence, truth: Sequence | None = None) -> tuple[Sequence, DeconvReport]:
        if not isinstance(y, Sequence):
            y = Sequence(y)
        n = len(y)
        if n <= 2 * self.order + 1:
            raise InputError(
                f"signal of length {n} is too short for a filter of order {self.order}"
            )
        report = resolution_report(self.decomposition, n)
        report.inverse_support = self.inverse_support
        report.partial = report.critical_count > 0

        w = y
        if self.inverse is not None:
            # a reflect- or wrap-continued signal stays exact under repeated continuation
            ext = extend(y, self.options.boundary, self.inverse.support, repeat=True)
            full = convolve(ext, self.inverse.z)
            lo = y.start - full.start
            w = Sequence(full.values[lo : lo + n], origin=y.origin)

        for pinv in self._pseudo_inverses(n):
            full = convolve(w, pinv.z)
            lo = y.start - full.start
            w = Sequence(full.values[lo : lo + n], origin=y.origin)

        trim = self.trim
        out_start, out_stop = y.start + trim, y.stop - trim
        if out_stop - out_start < 1:
            raise InputError(f"signal of length {n} is too short after trimming {trim} per side")
        out = w.window(out_start, out_stop)
        margin = min(self.margin, max((len(out) - 1) // 2, 0))
        w_start, w_stop = out_start + margin, out_stop - margin

        basis_w = None
        if self.groups:
            if w_stop - w_start <= 2 * self.m:
                raise InputError(
                    f"signal of length {n} is too short to separate a "
                    f"{2 * self.m}-dimensional kernel"
                )
            basis_w = np.column_stack(joint_kernel_basis(self.groups, w_start, w_stop))
            basis_o = np.column_stack(
                joint_kernel_basis(self.groups, out_start, out_stop, (w_start, w_stop))
            )
            coef = _kernel_coefficients(basis_w, out[margin : len(out) - margin])
            out = out - basis_o @ coef

        out = out / self.decomposition.gain
        report.offset = trim
        report.margin = margin
        result = Sequence(out, origin=-out_start)
        if truth is not None:
            ref = truth.window(w_start, w_stop)
            if basis_w is not None:
                ref = project_out_kernel(ref, list(basis_w.T))
            report.interior_rms = rms(out[margin : len(out) - margin], ref)
        return result, report


def _kernel_coefficients(basis: np.ndarray, values: np.ndarray, cond_tol: float = 1e-8) -> np.ndarray:
    norms = np.linalg.norm(basis, axis=0)
    if np.any(norms == 0):
        raise DegenerateBasisError("kernel basis contains a zero vector on this window")
    scaled = basis / norms
    u, sv, vt = np.linalg.svd(scaled, full_matrices=False)
    if sv[-1] < cond_tol * sv[0]:
        raise DegenerateBasisError(
            f"kernel basis is numerically collinear on this window (sigma_min/sigma_max={sv[-1] / sv[0]:.2e})"
        )
    coef = vt.T @ ((u.T @ values) / sv)
    resid = values - scaled @ coef
    coef = coef + vt.T @ ((u.T @ resid) / sv)
    return coef / norms


def deconvolve(y, f, options: DeconvOptions | None = None, truth: Sequence | None = None):
    """Restore ``y = f * x``; returns ``(x_hat, report)``.

    When ``truth`` is given, ``report.interior_rms`` compares the output with
    it on the interior window (after removing the same kernel components when
    the filter has non-invertible factors).
    """
    return Deconvolver(f, options).apply(y if isinstance(y, Sequence) else Sequence(y), truth)
