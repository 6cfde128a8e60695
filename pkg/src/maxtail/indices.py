"""Diagonal and maximal-path lower tail indices at finite u.

All three indices are limits as u -> 0.  Nothing here extrapolates: each
estimator returns its whole trajectory over the grid, and the estimate is
simply the value at the smallest u (for kappa, the last adjacent secant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from maxtail.copulas import Copula, Gaussian
from maxtail.maxdep import PathSample, SolverOptions, trace_max_path


@dataclass(frozen=True)
class GridSpec:
    u_max: float = 0.1
    u_min: float | None = None
    points: int = 15

    def __post_init__(self):
        if self.points < 3:
            raise ValueError("grid needs at least 3 points")
        if not (0.0 < self.u_max < 1.0):
            raise ValueError(f"u_max must lie in (0, 1), got {self.u_max}")
        if self.u_min is not None and not (0.0 < self.u_min < self.u_max):
            raise ValueError(f"u_min must lie in (0, u_max), got {self.u_min}")

    def u_grid(self, spec: Copula | None = None) -> np.ndarray:
        """Geometric grid from u_max down to u_min (strictly decreasing)."""
        u_min = self.u_min
        if u_min is None:
            u_min = default_u_min(spec)
        return np.geomspace(self.u_max, u_min, self.points)


def default_u_min(spec: Copula | None) -> float:
    return 1e-8 if isinstance(spec, Gaussian) else 1e-6


@dataclass
class Estimate:
    estimate: float
    trajectory: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def last_delta(self) -> float:
        good = self.trajectory[np.isfinite(self.trajectory)]
        if len(good) < 2:
            return math.nan
        return float(good[-1] - good[-2])


def _grid(u_grid):
    u = np.asarray(u_grid, dtype=float)
    if np.any(np.diff(u) >= 0.0):
        raise ValueError("u_grid must be strictly decreasing")
    return u


def lambda_estimate(values, u_grid) -> Estimate:
    """C(u)/u along the grid."""
    u = _grid(u_grid)
    vals = np.asarray(values, dtype=float)
    traj = vals / u
    flags = []
    if np.any(vals <= 0.0):
        flags.append("zero values")
    est = float(traj[-1]) if vals[-1] > 0.0 else 0.0
    return Estimate(est, traj, flags)


def chi_estimate(log_values, u_grid) -> Estimate:
    """2 ln u / ln C(u) - 1 along the grid; points with C(u) = 1 are skipped."""
    u = _grid(u_grid)
    lv = np.asarray(log_values, dtype=float)
    flags = []
    with np.errstate(divide="ignore", invalid="ignore"):
        traj = np.where(lv < 0.0, 2.0 * np.log(u) / lv - 1.0, np.nan)
    if np.any(lv >= 0.0):
        flags.append("undefined where C(u) = 1")
    finite = traj[np.isfinite(traj)]
    est = float(finite[-1]) if len(finite) else math.nan
    return Estimate(est, traj, flags)


def kappa_estimate(log_values, u_grid) -> Estimate:
    """Adjacent secant slopes of ln C(u) against ln u.

    ``trajectory[i]`` is the slope between grid points i and i+1, so the
    slowly varying factor cancels only asymptotically.
    """
    u = _grid(u_grid)
    if len(u) < 3:
        raise ValueError("kappa estimation needs at least 3 grid points")
    lv = np.asarray(log_values, dtype=float)
    with np.errstate(invalid="ignore"):
        traj = np.diff(lv) / np.diff(np.log(u))
    flags = []
    if not np.all(np.isfinite(traj)):
        flags.append("non-finite slopes")
    est = float(traj[-1])
    if np.isfinite(est) and not (1.0 <= est <= 2.0):
        flags.append("estimate outside [1, 2]")
    return Estimate(est, traj, flags)


def secant_from_one(log_values, u_grid) -> np.ndarray:
    """Slope of the chord from (ln 1, ln C(1)) = (0, 0) to (ln u, ln C(u))."""
    return np.asarray(log_values, dtype=float) / np.log(np.asarray(u_grid, dtype=float))


@dataclass
class IndexReport:
    spec: str
    u_grid: np.ndarray
    log_c_diag: np.ndarray
    log_pi_star: np.ndarray
    samples: list[PathSample]
    lambda_diag: Estimate
    lambda_star: Estimate
    chi_diag: Estimate
    chi_star: Estimate
    kappa_diag: Estimate
    kappa_star: Estimate

    @property
    def c_diag(self) -> np.ndarray:
        return np.exp(self.log_c_diag)

    @property
    def pi_star(self) -> np.ndarray:
        return np.array([s.pi_star for s in self.samples])

    def summary(self) -> dict:
        return {
            "lambda_diag": self.lambda_diag.estimate,
            "lambda_star": self.lambda_star.estimate,
            "chi_diag": self.chi_diag.estimate,
            "chi_star": self.chi_star.estimate,
            "kappa_diag": self.kappa_diag.estimate,
            "kappa_star": self.kappa_star.estimate,
        }


def index_report(spec: Copula, grid: GridSpec | None = None, opts: SolverOptions | None = None) -> IndexReport:
    grid = grid or GridSpec()
    u = grid.u_grid(spec)
    log_diag = spec.log_cdf(u, u)
    samples = trace_max_path(spec, u, opts)
    log_star = np.array([s.log_pi_star for s in samples])
    # the maximum over the section includes x = u
    log_star = np.maximum(log_star, log_diag)
    return IndexReport(
        spec=spec.text,
        u_grid=u,
        log_c_diag=log_diag,
        log_pi_star=log_star,
        samples=samples,
        lambda_diag=lambda_estimate(np.exp(log_diag), u),
        lambda_star=lambda_estimate(np.exp(log_star), u),
        chi_diag=chi_estimate(log_diag, u),
        chi_star=chi_estimate(log_star, u),
        kappa_diag=kappa_estimate(log_diag, u),
        kappa_star=kappa_estimate(log_star, u),
    )
