"""Level curves Phi(w) Phi(z) = alpha and their rotations.

Critical points of the Gaussian section correspond, through the change of
variables ``lambda_map``, to points (w, z) on a level curve whose rotation
by beta = arcsin(rho) lands on the same curve.  This module samples those
curves and counts such points.

Intersections are counted along the curve itself, parametrised as the two
mirror branches (w, z(w)) and (z(w), w) for w past the diagonal point.  The
polar radius r(theta) is single valued only when the curve is star shaped
about the origin (alpha <= 1/4 or alpha >= 1/2); ``polar_intersection_count``
gives an independent count for those levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf, log_ndtr, ndtr

from maxtail.special_fns import std_normal_quantile

LN2 = math.log(2.0)
QUARTER = 0.25


def _log_two_phi(x):
    """ln(2 Phi(x)), accurate near x = 0 where it is ~ sqrt(2/pi) x."""
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        near = np.log1p(erf(x / math.sqrt(2.0)))
    return np.where(x > -1.0, near, log_ndtr(x) + LN2)


def level_gap(w, z, alpha):
    """ln(Phi(w) Phi(z)) - ln(alpha), computed without loss near the origin."""
    return _log_two_phi(w) + _log_two_phi(z) - math.log(4.0 * alpha)


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def level_z(w: float, alpha: float) -> float:
    """z(w) = Phi^{-1}(alpha / Phi(w)) on the level curve."""
    _check_alpha(alpha)
    lw = float(log_ndtr(w))
    lz = math.log(alpha) - lw
    if not lz < 0.0:
        raise ValueError(f"Phi(w) must exceed alpha: w={w} is beyond the asymptote")
    if lz < -LN2:
        return std_normal_quantile(math.exp(lz))
    # upper half: work with 1 - Phi(z) to keep digits near the asymptote
    return -std_normal_quantile(-math.expm1(lz))


def level_z_array(w, alpha):
    from maxtail.special_fns import quantile_array

    w = np.asarray(w, dtype=float)
    lz = math.log(alpha) - log_ndtr(w)
    if np.any(lz >= 0.0):
        raise ValueError("Phi(w) must exceed alpha")
    out = np.empty_like(w)
    low = lz < -LN2
    out[low] = quantile_array(np.exp(lz[low]))
    out[~low] = -quantile_array(-np.expm1(lz[~low]))
    return out


def polar_span(alpha: float) -> list[tuple[float, float, bool]]:
    """Angular intervals (lo, hi, closed) on which r(theta) is single valued."""
    _check_alpha(alpha)
    pi = math.pi
    if alpha < QUARTER:
        return [(pi / 2, 2 * pi, False)]
    if alpha == QUARTER:
        return [(pi / 2, 3 * pi / 4, False), (7 * pi / 4, 2 * pi, False)]
    if alpha < 0.5:
        return [(0.0, pi / 2, True)]
    return [(0.0, pi / 2, False)]


def _in_span(alpha, theta):
    theta = np.mod(np.asarray(theta, dtype=float), 2.0 * math.pi)
    ok = np.zeros(theta.shape, dtype=bool)
    for lo, hi, closed in polar_span(alpha):
        if closed:
            ok |= (theta >= lo) & (theta <= hi)
        else:
            ok |= (theta > lo) & (theta < hi)
    return ok, theta


def polar_radius_array(alpha: float, theta, iters: int = 200) -> np.ndarray:
    """Vectorised r(theta) by bracketed bisection along each ray."""
    ok, theta = _in_span(alpha, theta)
    if not ok.all():
        bad = theta[~ok][0]
        raise ValueError(f"theta={bad} is outside the polar span of C_alpha for alpha={alpha}")
    c, s = np.cos(theta), np.sin(theta)
    g = lambda r: level_gap(r * c, r * s, alpha)  # noqa: E731
    start_sign = 1.0 if alpha <= QUARTER else -1.0
    lo = np.zeros_like(theta)
    hi = np.ones_like(theta)
    for _ in range(64):
        need = np.sign(g(hi)) == start_sign
        if not need.any():
            break
        lo = np.where(need, hi, lo)
        hi = np.where(need, 2.0 * hi, hi)
    if np.any(np.sign(g(hi)) == start_sign):
        raise ArithmeticError(f"no root bracketed for alpha={alpha} within r <= {hi.max()}")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = np.sign(g(mid)) == start_sign
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= 4e-16 * hi):
            break
    return 0.5 * (lo + hi)


def curve_polar_radius(alpha: float, theta: float) -> float:
    """r(theta) with Phi(r cos theta) Phi(r sin theta) = alpha."""
    return float(polar_radius_array(alpha, np.array([theta]))[0])


def radial_numerator(w: float, z: float) -> float:
    """Phi(w) w e^{-z^2/2} - Phi(z) z e^{-w^2/2}; positive iff w > z."""
    return float(ndtr(w) * w * math.exp(-0.5 * z * z) - ndtr(z) * z * math.exp(-0.5 * w * w))


def radial_log_derivative(w: float, z: float) -> float:
    """(1/r) dr/dtheta along the level curve through (w, z).

    Implicit differentiation of ln Phi(r cos t) + ln Phi(r sin t) = const.
    Raises ZeroDivisionError at points where the ray is tangent to the curve.
    """
    den = float(ndtr(w) * z * math.exp(-0.5 * z * z) + ndtr(z) * w * math.exp(-0.5 * w * w))
    if den == 0.0:
        raise ZeroDivisionError(f"singular point of the polar parametrisation at ({w}, {z})")
    return -radial_numerator(w, z) / den


def _check_rho(rho):
    if not (-1.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (-1, 1), got {rho}")


def lambda_map(u: float, x: float, rho: float) -> tuple[float, float]:
    """(u, x) in D = {0 < u < 1, u^2 < x < 1} to (w, z)."""
    _check_rho(rho)
    if not (0.0 < u < 1.0 and u * u < x < 1.0):
        raise ValueError(f"(u, x) = ({u}, {x}) is outside D")
    sig = math.sqrt((1.0 - rho) * (1.0 + rho))
    w = std_normal_quantile(x)
    y = u if x == u else u * u / x
    z = (std_normal_quantile(y) - rho * w) / sig
    return w, z


def lambda_map_inverse(w: float, z: float, rho: float) -> tuple[float, float]:
    _check_rho(rho)
    sig = math.sqrt((1.0 - rho) * (1.0 + rho))
    x = float(ndtr(w))
    u = math.sqrt(x * float(ndtr(rho * w + sig * z)))
    return u, x


def rotate(w, z, beta):
    cb, sb = math.cos(beta), math.sin(beta)
    return cb * w - sb * z, sb * w + cb * z


def rotated_residuals(w: float, z: float, alpha: float, beta: float) -> tuple[float, float]:
    """|Phi(w)Phi(z) - alpha| and the same for the beta-rotated point."""
    wr, zr = rotate(w, z, beta)
    return abs(float(ndtr(w) * ndtr(z)) - alpha), abs(float(ndtr(wr) * ndtr(zr)) - alpha)


def line_l_slope(rho: float) -> float:
    """Image of the diagonal u = x under lambda_map: z = slope * w."""
    return (1.0 - rho) / math.sqrt((1.0 - rho) * (1.0 + rho))


@dataclass
class LevelCurveProbe:
    alpha: float
    beta: float
    resolution: int
    intersections: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    origin_on_curve: bool = False
    radius_profile: tuple | None = None

    @property
    def n_intersections(self) -> int:
        return len(self.intersections)

    @property
    def max_residual(self) -> float:
        return max((max(r) for r in self.residuals), default=0.0)


_BRANCH_REACH = 40.0


class _Curve:
    """C_alpha as one parameter s in [-1, 1]; s = 0 is the diagonal point."""

    def __init__(self, alpha):
        self.alpha = alpha
        self.w_diag = std_normal_quantile(math.sqrt(alpha))

    def point(self, s):
        s = np.asarray(s, dtype=float)
        w = self.w_diag + _BRANCH_REACH * s * s
        z = level_z_array(w, self.alpha)
        z = np.where(s == 0.0, self.w_diag, z)
        # s < 0 is the mirror branch (z(w), w)
        return np.where(s >= 0.0, w, z), np.where(s >= 0.0, z, w)

    def gap(self, s, beta):
        w, z = self.point(s)
        wr, zr = rotate(w, z, beta)
        return level_gap(wr, zr, self.alpha)


def _roots_from_samples(g: np.ndarray) -> list[tuple[int, int]]:
    """Index pairs (i, j) bracketing a root; i == j marks an exact zero."""
    sign = np.sign(g)
    out = []
    last = None
    for k, sg in enumerate(sign):
        if sg == 0.0:
            out.append((k, k))
            last = None
            continue
        if last is not None and sign[last] != sg:
            out.append((last, k))
        last = k
    return out


def intersection_probe(alpha: float, beta: float, resolution: int = 2000, radius_points: int = 0) -> LevelCurveProbe:
    """Points (w, z) on C_alpha whose beta-rotation is also on C_alpha."""
    _check_alpha(alpha)
    if not (0.0 < beta < math.pi / 2):
        raise ValueError(f"beta must lie in (0, pi/2), got {beta}")
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    curve = _Curve(alpha)
    res = resolution
    for _ in range(3):
        s = np.linspace(-1.0, 1.0, 2 * res + 1)
        g = curve.gap(s, beta)
        brackets = _roots_from_samples(g)
        starts = [i for i, _ in brackets]
        crowded = any(b - a < 3 for a, b in zip(starts, starts[1:]))
        if not crowded:
            break
        res *= 4

    f = lambda t: float(curve.gap(np.array([t]), beta)[0])  # noqa: E731
    probe = LevelCurveProbe(alpha, beta, res)
    for i, j in brackets:
        t = s[i] if i == j else brentq(f, s[i], s[j], xtol=1e-15, rtol=8.9e-16, maxiter=200)
        w, z = (float(c[0]) for c in curve.point(np.array([t])))
        probe.intersections.append((w, z))
        probe.residuals.append(rotated_residuals(w, z, alpha, beta))

    if alpha == QUARTER:
        probe.origin_on_curve = True
        if not any(math.hypot(w, z) <= 1e-10 for w, z in probe.intersections):
            raise ArithmeticError("origin of C_1/4 was not detected as an intersection")
    if radius_points:
        probe.radius_profile = radius_profile(alpha, radius_points)
    return probe


def radius_profile(alpha: float, points: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Sampled (theta, r(theta)) over the polar span, endpoints excluded."""
    thetas = []
    for lo, hi, _ in polar_span(alpha):
        edge = 1e-3 * (hi - lo)
        thetas.append(np.linspace(lo + edge, hi - edge, points))
    th = np.concatenate(thetas)
    return th, polar_radius_array(alpha, th)


def polar_intersection_count(alpha: float, beta: float, resolution: int = 4000) -> int:
    """Sign changes of r(theta) - r(theta - beta) over the common span.

    Only defined where C_alpha is star shaped about the origin; the origin
    itself counts once for alpha = 1/4.
    """
    _check_alpha(alpha)
    if QUARTER < alpha < 0.5:
        raise ValueError("C_alpha is not star shaped about the origin for alpha in (1/4, 1/2)")
    count = 1 if alpha == QUARTER else 0
    spans = polar_span(alpha)
    for lo, hi, _ in spans:
        for lo2, hi2, _ in spans:
            a, b = max(lo, lo2 + beta), min(hi, hi2 + beta)
            if b - a <= 1e-9:
                continue
            edge = 1e-6 * (b - a)
            th = np.linspace(a + edge, b - edge, resolution)
            diff = polar_radius_array(alpha, th) - polar_radius_array(alpha, th - beta)
            count += len(_roots_from_samples(diff))
    return count


DEFAULT_ALPHAS = (0.05, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.7, 0.9)
DEFAULT_BETAS = tuple(k * math.pi / 12 for k in (1, 2, 3, 4, 5))


PROBE_COLUMNS = ("alpha", "beta", "n_intersections", "w", "z")


def probe_rows(probe: LevelCurveProbe) -> list[tuple]:
    """One CSV row per intersection point (a single empty-point row if none)."""
    n = probe.n_intersections
    if not n:
        return [(probe.alpha, probe.beta, 0, math.nan, math.nan)]
    return [(probe.alpha, probe.beta, n, w, z) for w, z in probe.intersections]
