"""Characteristic polynomials and factorization into elementary filters.

A symmetric filter ``c(-N..N)`` has the palindromic characteristic polynomial
``P(x) = sum c(k) x**(k+N)``. Substituting ``y = x + 1/x`` turns
``P(x) / x**N`` into a degree-``N`` polynomial in ``y``, because
``x**k + x**-k`` is a polynomial ``G_k(y)`` with ``G_0 = 2``, ``G_1 = y`` and
``G_{k+1} = y G_k - G_{k-1}``. Each elementary factor ``x**2 + p x + 1``
contributes ``(y + p)``, so the factor parameters are the roots of
``Q(x) = (-1)**N R(-x)``, a polynomial of half the degree of ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elementary import FactorClass, classify
from .exceptions import InputError, NumericalError, RootFindingError
from .signal import Sequence, centered

SYMMETRY_RTOL = 1e-12
RECONVOLVE_RTOL = 1e-9
RESIDUAL_RTOL = 1e-11


@dataclass(frozen=True, eq=False)
class Filter:
    """Symmetric filter ``c(-N), ..., c(N)`` with ``c(N) != 0``.

    Zero coefficients at both ends are stripped on construction, so ``order``
    is tight. ``gain`` is the end coefficient ``c(N)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0 or c.size % 2 != 1:
            raise InputError(f"filter needs odd length 2N+1, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise InputError("filter contains non-finite coefficients")
        scale = float(np.max(np.abs(c)))
        if scale == 0.0:
            raise InputError("filter is identically zero")
        if np.max(np.abs(c - c[::-1])) > SYMMETRY_RTOL * scale:
            raise InputError(f"filter is not symmetric: {c.tolist()}")
        c = 0.5 * (c + c[::-1])
        while c.size > 1 and c[0] == 0.0:
            c = c[1:-1]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_half(cls, half) -> "Filter":
        """Build from ``[c(0), c(1), ..., c(N)]``."""
        half = np.asarray(half, dtype=float).ravel()
        if half.size == 0:
            raise InputError("empty half filter")
        return cls(np.concatenate([half[:0:-1], half]))

    @property
    def order(self) -> int:
        return len(self.coeffs) // 2

    @property
    def gain(self) -> float:
        return float(self.coeffs[-1])

    @property
    def half(self) -> np.ndarray:
        return self.coeffs[self.order :]

    def as_sequence(self) -> Sequence:
        return centered(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"Filter({self.coeffs.tolist()!r})"


@dataclass(frozen=True, eq=False)
class CharPolynomial:
    """Monic palindromic polynomial of degree ``2N`` (coefficients read the same either way)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size % 2 != 1:
            raise InputError(f"palindromic polynomial needs odd coefficient count, got {c.size}")
        if not np.array_equal(c, c[::-1]):
            raise InputError(f"polynomial is not palindromic: {c.tolist()}")
        if c[0] != 1.0:
            raise InputError(f"polynomial is not monic: leading coefficient {c[0]}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def roots(self) -> np.ndarray:
        return np.roots(self.coeffs)


@dataclass(frozen=True, eq=False)
class QPolynomial:
    """Monic degree-``N`` polynomial whose roots are the factor parameters.

    ``coeffs`` are ordered from the leading term down, as in :func:`numpy.polyval`.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size < 1 or c[0] != 1.0:
            raise InputError(f"Q polynomial must be monic, got {c.tolist()}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polyval(self.coeffs, x)


@dataclass(frozen=True)
class ElementaryFactor:
    p: complex
    klass: FactorClass
    partner: int | None = None

    @property
    def is_real(self) -> bool:
        return self.p.imag == 0.0

    @property
    def value(self):
        """``p`` as a float when real, else complex."""
        return self.p.real if self.is_real else self.p


@dataclass(frozen=True, eq=False)
class Decomposition:
    gain: float
    factors: tuple[ElementaryFactor, ...] = field(default_factory=tuple)
    residual: float = 0.0

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def params(self) -> list:
        return [f.value for f in self.factors]

    def count(self, predicate) -> int:
        return sum(1 for f in self.factors if predicate(f.klass))

    @property
    def invertible_count(self) -> int:
        return self.count(lambda k: k.invertible)

    @property
    def noninvertible_count(self) -> int:
        return self.order - self.invertible_count


def char_polynomial(f: Filter) -> CharPolynomial:
    return CharPolynomial(f.coeffs / f.gain)


def chebyshev_g(k: int) -> np.ndarray:
    """Ascending coefficients of ``G_k(y) = x**k + x**-k`` where ``y = x + 1/x``."""
    g_prev = np.array([2.0])
    g = np.array([0.0, 1.0])
    if k == 0:
        return g_prev
    for _ in range(k - 1):
        nxt = np.zeros(len(g) + 1)
        nxt[1:] = g
        nxt[: len(g_prev)] -= g_prev
        g_prev, g = g, nxt
    return g


def reduce_to_q(pc) -> QPolynomial:
    """Halve the degree of a palindromic polynomial.

    For ``N = 2``, ``x**4 + a x**3 + b x**2 + a x + 1`` maps to
    ``x**2 - a x + (b - 2)``.
    """
    if not isinstance(pc, CharPolynomial):
        pc = CharPolynomial(pc)
    n = pc.degree // 2
    h = pc.coeffs[n:]
    r = np.zeros(n + 1)
    r[0] = h[0]
    for k in range(1, n + 1):
        g = chebyshev_g(k)
        r[: k + 1] += h[k] * g
    # R(y) has roots -p; Q(x) = (-1)**N R(-x) has roots p
    signs = np.where(np.arange(n + 1) % 2 == n % 2, 1.0, -1.0)
    q = (r * signs)[::-1]
    q[0] = 1.0
    return QPolynomial(q)


def _residual_bound(coeffs, p) -> float:
    # never demand more than the rounding noise of evaluating q at p
    n = len(coeffs) - 1
    noise = 64 * np.finfo(float).eps * float(np.polyval(np.abs(coeffs), abs(p)))
    return max(RESIDUAL_RTOL * (1.0 + abs(p) ** n), noise)


def _link_radius(n: int) -> float:
    # a k-fold root scatters by about eps**(1/k) and n bounds k
    return max(1e-2, 2.0 * np.finfo(float).eps ** (1.0 / n))


def _polish(q: np.ndarray, dq: np.ndarray, r, steps: int = 12, reach: float = math.inf):
    """Newton steps that lower ``|q|`` without leaving ``reach`` of the start."""
    with np.errstate(over="ignore", invalid="ignore"):  # a wild step just fails the test below
        start, val = r, np.polyval(q, r)
        for _ in range(steps):
            d = np.polyval(dq, r)
            if d == 0:
                break
            cand = r - val / d
            cval = np.polyval(q, cand)
            # a near-multiple root makes q' tiny; never hop onto a different root
            if not abs(cval) < abs(val) or abs(cand - start) > reach:
                break
            r, val = cand, cval
    return r, abs(val)


def find_factor_params(q: QPolynomial) -> list[ElementaryFactor]:
    """Roots of ``q`` as elementary factors, conjugate pairs linked by ``partner``.

    Roots come from the companion-matrix eigenvalues and are polished by
    Newton steps on ``q``. Exact zeros and values at ``+-2`` are deflated
    first so that critical factors keep their exact value and multiplicity;
    the deflation is dropped again if the undeflated roots fit ``q`` better.
    Eigenvalue clusters are read as multiple roots when that rebuilds the
    coefficients as well as the scattered values do.
    """
    if not isinstance(q, QPolynomial):
        q = QPolynomial(q)
    n = q.degree
    if n < 1:
        return []
    coeffs = q.coeffs.astype(float)

    roots, deflated = _solve(coeffs, n, deflate_critical=True)
    if deflated:
        # a root just off +-2 can pass the deflation test; keep whichever reading fits q better
        alt, _ = _solve(coeffs, n, deflate_critical=False)
        if len(alt) == n and _coefficient_error(coeffs, alt) < _coefficient_error(coeffs, roots):
            roots = alt

    worst = max(abs(np.polyval(coeffs, r)) / _residual_bound(coeffs, r) for r in roots)
    # near 0 the coefficients' own rounding can exceed any residual bound; fall back on backward error
    if worst > 1.0 and len(roots) == n:
        worst = _coefficient_error(coeffs, roots) / (RESIDUAL_RTOL * float(np.max(np.abs(coeffs))))
    if len(roots) != n or worst > 1.0:
        res = max(abs(np.polyval(coeffs, r)) for r in roots) if roots else math.inf
        raise RootFindingError(coeffs, res)
    return _as_factors(roots)


def _solve(coeffs: np.ndarray, n: int, deflate_critical: bool) -> tuple[list[complex], bool]:
    roots: list[complex] = []
    work = coeffs.copy()
    # trailing zero coefficients are exact roots at 0
    while len(work) > 1 and work[-1] == 0.0:
        work = work[:-1]
        roots.append(0j)
    deflated = False
    for crit in (2.0, -2.0) if deflate_critical else ():
        while len(work) > 1:
            scale = float(np.polyval(np.abs(work), abs(crit)))
            if abs(np.polyval(work, crit)) > 64 * np.finfo(float).eps * scale:
                break
            work, _ = np.polydiv(work, np.array([1.0, -crit]))
            roots.append(complex(crit))
            deflated = True
    if len(work) <= 1:
        return roots, deflated

    dq = np.polyder(coeffs)
    found: list[complex] = []
    with np.errstate(over="ignore", invalid="ignore"):  # subnormal coefficients
        raw = np.roots(work)
    link = _link_radius(n)
    for r in raw[raw.imag == 0.0]:
        pr, _ = _polish(coeffs, dq, r.real, reach=link * (1.0 + abs(r)))
        found.append(complex(pr))
    # eigenvalues of a real matrix come in exact conjugate pairs: polish one of each
    for r in raw[raw.imag > 0.0]:
        pr, _ = _polish(coeffs, dq, complex(r), reach=link * (1.0 + abs(r)))
        pr = complex(pr.real, abs(pr.imag))
        found.extend([pr, pr.conjugate()])
    # judge candidates against the full polynomial: deflation leaves rounding in ``work``
    exact = list(roots)
    # nearby distinct roots can pass for one multiple root; refine both readings
    candidates = [
        _refine_jointly(coeffs, exact, _merge_clusters(coeffs, exact, found, n)),
        _refine_jointly(coeffs, exact, found, steps=8),
    ]
    roots.extend(_pick_closest(coeffs, exact, candidates))
    return roots, deflated


def _coefficient_error(coeffs, roots, fixed=()) -> float:
    return float(np.max(np.abs(np.poly(list(fixed) + list(roots)) - coeffs)))


def _merge_clusters(coeffs, fixed, roots: list[complex], n: int) -> list[complex]:
    """Collapse tight clusters around the real axis into multiple real roots.

    A ``k``-fold root comes back from the eigenvalue solver as ``k`` values
    scattered by roughly ``eps**(1/k)``. Each cluster, sorted along the real
    axis, is cut into consecutive blocks in every possible way; a block of
    size ``m`` becomes one ``m``-fold root at its derivative-polished centre.
    After joint refinement the coarsest cut whose rebuild error, together
    with the exactly known ``fixed`` roots, is within rounding of the best
    cut wins.
    """
    roots = list(roots)
    link = _link_radius(n)
    remaining = list(range(len(roots)))
    clusters = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for j in list(remaining):
                if any(abs(roots[j] - roots[i]) <= link * (1.0 + abs(roots[i])) for i in group):
                    group.append(j)
                    remaining.remove(j)
                    grew = True
        clusters.append(group)

    def merge(base, members, size):
        center = complex(np.mean([roots[i] for i in members]))
        if abs(center.imag) > 1e-6 * (1.0 + abs(center)):
            return None
        c = _polish_multiple(coeffs, center.real, size)
        out = list(base)
        for i in members:
            out[i] = complex(c)
        return out

    clusters = [sorted(g, key=lambda i: (roots[i].real, roots[i].imag)) for g in clusters if len(g) > 1]
    # start from every cluster fully merged, then let each one pick its best split
    merged = list(roots)
    for group in clusters:
        merged = merge(merged, group, len(group)) or merged
    for group in clusters:
        base = list(merged)
        for i in group:
            base[i] = roots[i]
        options = []
        splits = _compositions(len(group)) if len(group) <= 8 else [[len(group)], [1] * len(group)]
        for blocks in splits:
            trial, pos = base, 0
            for size in blocks:
                if trial is not None and size > 1:
                    trial = merge(trial, group[pos : pos + size], size)
                pos += size
            if trial is not None:
                # derivative-polished centres are only as good as q' is conditioned
                options.append((len(blocks), _refine_jointly(coeffs, fixed, trial)))
        best = _pick_closest(coeffs, fixed, [t for _, t in sorted(options, key=lambda o: o[0])])
        merged = best
    return merged


def _pick_closest(coeffs, fixed, candidates: list) -> list:
    """First candidate whose coefficient error is within rounding of the best one.

    The error is dominated by the worst-conditioned roots, so differences
    below the rounding floor say nothing; order ``candidates`` by preference.
    """
    errs = [_coefficient_error(coeffs, c, fixed) for c in candidates]
    floor = min(errs) + 4 * np.finfo(float).eps * float(np.max(np.abs(coeffs)))
    return next(c for c, e in zip(candidates, errs) if e <= floor)


def _compositions(k: int):
    """Ordered ways to cut ``k`` sorted items into consecutive blocks."""
    for mask in range(1 << (k - 1)):
        blocks, size = [], 1
        for bit in range(k - 1):
            if mask >> bit & 1:
                blocks.append(size)
                size = 1
            else:
                size += 1
        blocks.append(size)
        yield blocks


def _symmetrize(roots: list[complex]) -> list[complex]:
    """Restore exact conjugate symmetry after a complex update step."""
    out = list(roots)
    used = [False] * len(out)
    for i, r in enumerate(out):
        if used[i]:
            continue
        used[i] = True
        if abs(r.imag) <= 1e-14 * (1.0 + abs(r)):
            out[i] = complex(r.real)
            continue
        j = min((j for j in range(len(out)) if not used[j]), key=lambda j: abs(out[j] - r.conjugate()), default=None)
        if j is None:
            out[i] = complex(r.real)
            continue
        used[j] = True
        m = 0.5 * (r + out[j].conjugate())
        out[i], out[j] = m, m.conjugate()
    return out


def _refine_jointly(coeffs, fixed, roots: list[complex], steps: int = 4) -> list[complex]:
    """Gauss-Newton on the map from roots to monic coefficients.

    Separately polished roots of a tight cluster each satisfy ``Q(r) ~ 0`` yet
    rebuild the coefficients poorly; this step minimizes the rebuild error
    directly. A step is kept only when it lowers that error.
    """
    if len(roots) < 2:
        return roots
    best = list(roots)
    err = _coefficient_error(coeffs, best, fixed)
    k = len(fixed)
    for _ in range(steps):
        r = np.array(list(fixed) + best, dtype=complex)
        res = (np.poly(r) - coeffs)[1:]
        jac = np.column_stack([-np.poly(np.delete(r, j)) for j in range(k, len(r))])
        delta = np.linalg.lstsq(jac, -res, rcond=None)[0]
        trial = _symmetrize(list(r[k:] + delta))
        trial_err = _coefficient_error(coeffs, trial, fixed)
        if not trial_err < err:
            break
        best, err = trial, trial_err
    return best


def _polish_multiple(coeffs, r: float, k: int) -> float:
    """Refine a ``k``-fold real root as a simple root of the ``(k-1)``-th derivative."""
    d = np.polyder(coeffs, k - 1)
    best, _ = _polish(d, np.polyder(d), r, steps=20, reach=_link_radius(len(coeffs) - 1) * (1.0 + abs(r)))
    return float(best.real) if isinstance(best, complex) else float(best)


def _sort_key(r: complex):
    klass = classify(r)
    rank = 0 if klass.invertible else (1 if klass.critical else 2)
    return (rank, -abs(r), -r.real, -r.imag)


def _as_factors(roots) -> list[ElementaryFactor]:
    ordered = sorted(roots, key=_sort_key)
    factors: list[ElementaryFactor] = []
    for i, r in enumerate(ordered):
        partner = None
        if r.imag > 0:
            partner = i + 1
        elif r.imag < 0:
            partner = i - 1
        factors.append(ElementaryFactor(complex(r), classify(r), partner))
    for i, f in enumerate(factors):
        if f.partner is not None and factors[f.partner].p != f.p.conjugate():
            raise NumericalError(f"unpaired complex factor p={f.p}")
    return factors


def _product(factors) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for f in factors:
        out = np.convolve(out, np.array([1.0, f.p, 1.0], dtype=complex))
    return out


def decompose(f: Filter) -> Decomposition:
    """Write ``f`` as ``gain * [1, p1, 1] * ... * [1, pN, 1]``."""
    if not isinstance(f, Filter):
        f = Filter(f)
    gain = f.gain
    if f.order == 0:
        return Decomposition(gain, (), 0.0)
    factors = find_factor_params(reduce_to_q(char_polynomial(f)))
    rebuilt = gain * _product(factors)
    scale = float(np.max(np.abs(f.coeffs)))
    residual = float(np.max(np.abs(rebuilt - f.coeffs))) / scale
    if residual > RECONVOLVE_RTOL:
        raise NumericalError(
            f"decomposition residual {residual:.3e} exceeds {RECONVOLVE_RTOL:.0e} for {f!r}"
        )
    return Decomposition(gain, tuple(factors), residual)


def reconvolve(d: Decomposition) -> Filter:
    """``gain`` times the convolution of all ``[1, p, 1]`` factors."""
    for i, fac in enumerate(d.factors):
        if fac.is_real:
            continue
        j = fac.partner
        if j is None or not 0 <= j < len(d.factors) or d.factors[j].p != fac.p.conjugate():
            raise InputError(f"unpaired complex factor p={fac.p}")
    c = d.gain * _product(d.factors)
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c.imag)) > 1e-10 * scale:
        raise NumericalError("reconvolution left an imaginary residue above 1e-10")
    return Filter(c.real)


def decomposition_from_params(params, gain: float = 1.0) -> Decomposition:
    """Decomposition with the given factor parameters (conjugate pairs are linked)."""
    roots = [complex(p) for p in params]
    return Decomposition(float(gain), tuple(_as_factors(roots)), 0.0)
