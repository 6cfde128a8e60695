"""Paths of maximal dependence.

For each level u the section x -> C(x, u^2/x) on [u^2, 1] is maximised
globally: a log-spaced scan finds every candidate basin, each basin is
refined by golden-section search in ln x, and values are compared as
ln C so Gaussian sections at u ~ 1e-8 are not lost to underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from maxtail.copulas import Copula, Gaussian
from maxtail.special_fns import LOG_UNDERFLOW, quantile_array, std_normal_cdf, std_normal_quantile

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
# relative tolerance for "equal" section values in the scan and among optima
TIE_TOL = 1e-12
MULTIMODAL_TOL = 1e-10
CONSTANT_TOL = 1e-13


@dataclass(frozen=True)
class SolverOptions:
    scan_points: int = 512
    xtol: float = 1e-10
    refine_iters: int = 200

    def __post_init__(self):
        if self.scan_points < 8:
            raise ValueError("scan_points must be at least 8")
        if not self.xtol > 0.0:
            raise ValueError("xtol must be positive")


@dataclass(frozen=True)
class SectionMax:
    u: float
    x_star: float
    pi_star: float
    log_pi_star: float
    boundary: bool
    multimodal: bool
    maximizers: tuple = ()

    @property
    def psi_star(self) -> float:
        return _partner(self.u, self.x_star)


@dataclass(frozen=True)
class PathSample:
    u: float
    x_star: float
    pi_star: float
    psi_star: float
    log_pi_star: float = -math.inf
    boundary: bool = False
    multimodal: bool = False


@dataclass
class Admissibility:
    passed: bool
    range_violations: list = field(default_factory=list)
    trend_violations: list = field(default_factory=list)
    boundary_indices: list = field(default_factory=list)

    def summary(self) -> str:
        if self.passed:
            return "PASS"
        parts = []
        if self.range_violations:
            parts.append(f"C1 violated at {self.range_violations}")
        if self.trend_violations:
            parts.append(f"C2 violated at {self.trend_violations}")
        if self.boundary_indices:
            parts.append(f"boundary maxima at {self.boundary_indices}")
        return "FAIL (" + "; ".join(parts) + ")"


def _check_u(u):
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in (0, 1), got {u}")


def _partner(u, x):
    # u^2 / x, exact on the diagonal and never above 1
    if x == u:
        return u
    return min(u * u / x, 1.0)


def _partner_array(u, x):
    x = np.asarray(x, dtype=float)
    return np.where(x == u, u, np.minimum(u * u / x, 1.0))


def log_section_values(spec: Copula, u: float, x) -> np.ndarray:
    """ln C(x, u^2/x) for an array of x in [u^2, 1]."""
    x = np.asarray(x, dtype=float)
    return spec.log_cdf(x, _partner_array(u, x))


def section_value(spec: Copula, u: float, x: float) -> float:
    """C(x, u^2/x)."""
    _check_u(u)
    if not (u * u <= x <= 1.0):
        raise ValueError(f"x must lie in [u^2, 1] = [{u * u}, 1], got {x}")
    return spec.cdf(x, _partner(u, x))


def _linear_value(spec, u, x, logv):
    # closed forms are exact on the linear scale; the log is kept for comparisons
    if logv < LOG_UNDERFLOW:
        return math.exp(logv)
    return spec.cdf(x, _partner(u, x))


def _golden_max(f, lo, hi, tol, max_iter):
    """Maximise f on [lo, hi]; returns (argmax, value).  Endpoints included."""
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > tol and it < max_iter:
        # ">=" keeps the left point on ties, biasing toward smaller x
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
        it += 1
    best = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    fbest = max(v for v, _ in best)
    xbest = min(x for v, x in best if v >= fbest - _tie(fbest))
    return xbest, fbest


def _tie(logv):
    return TIE_TOL * max(1.0, abs(logv)) if math.isfinite(logv) else 0.0


def _local_max_indices(f: np.ndarray) -> list[int]:
    """First index of every strict local-max plateau (endpoints included)."""
    n = len(f)
    idx = []
    k = 0
    while k < n:
        j = k
        while j + 1 < n and f[j + 1] == f[k]:
            j += 1
        left = f[k - 1] if k > 0 else -np.inf
        right = f[j + 1] if j + 1 < n else -np.inf
        if np.isfinite(f[k]) and f[k] > left and f[k] > right:
            idx.append(k)
        k = j + 1
    return idx


def _polish_gaussian(spec, u, x_star, f_top, cell, f_of_t):
    """Root-find the stationarity residual near x*.

    Golden-section on values only locates a smooth maximum to ~sqrt(eps);
    the residual changes sign at the maximiser, so a bracketed root gets x*
    to full precision.
    """
    if x_star == u:
        return x_star, f_top
    lo, hi = x_star * math.exp(-2.0 * cell), x_star * math.exp(2.0 * cell)
    lo, hi = max(lo, u * u * (1.0 + 1e-15)), min(hi, 1.0 - 1e-15)
    g = lambda x: critical_residual_gaussian(u, x, spec.rho)  # noqa: E731
    # the diagonal is always stationary; prefer it when it is in the bracket
    cands = [u] if lo <= u <= hi else []
    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0.0 > g_hi:
        cands.append(brentq(g, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200))
    for x in cands:
        fx = f_of_t(math.log(x))
        if fx >= f_top - _tie(f_top):
            return x, fx
    return x_star, f_top


def maximize_section(spec: Copula, u: float, opts: SolverOptions | None = None) -> SectionMax:
    """Global maximum of x -> C(x, u^2/x) over [u^2, 1]."""
    _check_u(u)
    opts = opts or SolverOptions()
    lo_t, hi_t = math.log(u * u), 0.0
    tgrid = np.linspace(lo_t, hi_t, opts.scan_points)
    xgrid = np.exp(tgrid)
    xgrid[0], xgrid[-1] = u * u, 1.0
    fgrid = log_section_values(spec, u, xgrid)

    finite = np.isfinite(fgrid)
    if finite.all() and fgrid.max() - fgrid.min() <= CONSTANT_TOL * max(1.0, abs(fgrid.max())):
        lv = float(log_section_values(spec, u, np.array([u]))[0])
        return SectionMax(u, u, _linear_value(spec, u, u, lv), lv, False, False, (u,))

    def f_of_t(t):
        x = u * u if t <= lo_t else (1.0 if t >= hi_t else math.exp(t))
        return float(log_section_values(spec, u, np.array([x]))[0])

    cands = []
    for k in _local_max_indices(fgrid):
        a = tgrid[max(k - 1, 0)]
        b = tgrid[min(k + 1, len(tgrid) - 1)]
        t_best, f_best = _golden_max(f_of_t, a, b, opts.xtol, opts.refine_iters)
        if f_best < fgrid[k]:
            t_best, f_best = tgrid[k], float(fgrid[k])
        cands.append((t_best, f_best))
    if not cands:
        k = int(np.argmax(np.where(finite, fgrid, -np.inf)))
        cands.append((tgrid[k], float(fgrid[k])))

    f_top = max(fv for _, fv in cands)
    t_star = min(t for t, fv in cands if fv >= f_top - _tie(f_top))
    cell = tgrid[1] - tgrid[0]
    boundary = t_star <= lo_t + cell or t_star >= hi_t - cell
    interior_top = sorted(
        t for t, fv in cands
        if fv >= f_top - MULTIMODAL_TOL * max(1.0, abs(f_top)) and lo_t + cell < t < hi_t - cell
    )
    # distinct basins: separated by more than one scan cell
    distinct = []
    for t in interior_top:
        if not distinct or t - distinct[-1] > cell:
            distinct.append(t)
    x_star = u * u if t_star <= lo_t else (1.0 if t_star >= hi_t else math.exp(t_star))
    if isinstance(spec, Gaussian) and not boundary and len(distinct) < 2:
        x_star, f_top = _polish_gaussian(spec, u, x_star, f_top, cell, f_of_t)
    maximizers = tuple(math.exp(t) for t in distinct) or (x_star,)
    pi_star = _linear_value(spec, u, x_star, f_top)
    return SectionMax(u, x_star, pi_star, f_top, bool(boundary), len(distinct) >= 2, maximizers)


def trace_max_path(spec: Copula, u_grid, opts: SolverOptions | None = None) -> list[PathSample]:
    """One independent section maximisation per u (no warm starts)."""
    u_grid = [float(u) for u in u_grid]
    if any(not (0.0 < u < 1.0) for u in u_grid):
        raise ValueError("u_grid values must lie in (0, 1)")
    if any(b >= a for a, b in zip(u_grid, u_grid[1:])):
        raise ValueError("u_grid must be strictly decreasing")
    out = []
    for u in u_grid:
        try:
            sm = maximize_section(spec, u, opts)
        except Exception as exc:
            raise ValueError(f"section maximisation failed at u={u!r}: {exc}") from exc
        out.append(PathSample(u, sm.x_star, sm.pi_star, sm.psi_star, sm.log_pi_star, sm.boundary, sm.multimodal))
    return out


def admissibility_check(samples, tail: int = 5) -> Admissibility:
    """Check x* in [u^2, 1] everywhere and that x*, u^2/x* both decrease over the tail."""
    range_bad = [
        i for i, s in enumerate(samples)
        if not (s.u * s.u * (1.0 - 1e-12) <= s.x_star <= 1.0)
    ]
    tail_idx = list(range(max(0, len(samples) - tail), len(samples)))
    trend_bad = []
    for i, j in zip(tail_idx, tail_idx[1:]):
        if not (samples[j].x_star < samples[i].x_star and samples[j].psi_star < samples[i].psi_star):
            trend_bad.append(j)
    boundary = [i for i, s in enumerate(samples) if s.boundary]
    return Admissibility(not range_bad and not trend_bad, range_bad, trend_bad, boundary)


def critical_residual_gaussian(u: float, x: float, rho: float) -> float:
    """x C_{2|1}(u^2/x | x) - (u^2/x) C_{1|2}(x | u^2/x) for the Gaussian copula."""
    _check_u(u)
    if not (u * u < x < 1.0):
        raise ValueError(f"x must lie in (u^2, 1), got {x}")
    if not (-1.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (-1, 1), got {rho}")
    y = _partner(u, x)
    sig = math.sqrt((1.0 - rho) * (1.0 + rho))
    qx, qy = std_normal_quantile(x), std_normal_quantile(y)
    lhs = x * float(std_normal_cdf((qy - rho * qx) / sig))
    rhs = y * float(std_normal_cdf((qx - rho * qy) / sig))
    return lhs - rhs


def critical_residual_gaussian_array(u: float, x, rho: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = _partner_array(u, x)
    sig = math.sqrt((1.0 - rho) * (1.0 + rho))
    qx, qy = quantile_array(x), quantile_array(y)
    return x * ndtr((qy - rho * qx) / sig) - y * ndtr((qx - rho * qy) / sig)
