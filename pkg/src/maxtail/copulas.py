"""Closed-form bivariate copulas and their conditional distributions.

Every family is a frozen dataclass with a vectorised ``log_cdf`` that the
section maximiser scans with, and a scalar ``cdf``.  Boundary identities
C(u, 0) = C(0, v) = 0, C(u, 1) = u and C(1, v) = v are enforced exactly by
the shared base class rather than trusted to each closed form.

Canonical text forms (used by the CLI)::

    indep
    nelsen33:theta=0.25
    mo:a=0.3,b=0.6
    gaussian:rho=0.5
    evcmix:s=0.3,psi1=0.9,psi2=0.2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, NamedTuple

import numpy as np

from maxtail.special_fns import (
    log_bvn_cdf_array,
    quantile_array,
    std_normal_cdf,
    std_normal_quantile,
)

KINK_TOL = 1e-9
FD_STEP = 1e-6
PICKANDS_FD_STEP = 1e-5


class Conditional(NamedTuple):
    value: float
    near_kink: bool = False


def _check_unit(name, x, lo=0.0, hi=1.0):
    if not (lo <= x <= hi):
        raise ValueError(f"{name} must lie in [{lo}, {hi}], got {x}")


class Copula:
    """Shared evaluation logic; subclasses provide ``_log_cdf_interior``."""

    family: ClassVar[str]
    symmetric: ClassVar[bool] = True

    @property
    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def text(self) -> str:
        if not self.params:
            return self.family
        body = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.family}:{body}"

    def __str__(self):
        return self.text

    def _log_cdf_interior(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_cdf(self, u, v) -> np.ndarray:
        """Vectorised ln C(u, v) with exact boundary identities."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        u = u.astype(float, copy=True)
        v = v.astype(float, copy=True)
        out = np.empty(u.shape)
        zero = (u <= 0.0) | (v <= 0.0)
        u_one = ~zero & (u >= 1.0)
        v_one = ~zero & ~u_one & (v >= 1.0)
        inner = ~(zero | u_one | v_one)
        out[zero] = -np.inf
        with np.errstate(divide="ignore"):
            out[u_one] = np.log(v[u_one])
            out[v_one] = np.log(u[v_one])
        if inner.any():
            raw = self._log_cdf_interior(u[inner], v[inner])
            # Frechet upper bound absorbs round-off in the closed forms
            out[inner] = np.minimum(raw, np.log(np.minimum(u[inner], v[inner])))
        return out

    def cdf(self, u: float, v: float) -> float:
        _check_unit("u", u)
        _check_unit("v", v)
        if u == 0.0 or v == 0.0:
            return 0.0
        if u == 1.0:
            return float(v)
        if v == 1.0:
            return float(u)
        return self._cdf_interior(u, v)

    def _cdf_interior(self, u: float, v: float) -> float:
        val = float(np.exp(self._log_cdf_interior(np.array([u]), np.array([v]))[0]))
        # exp(ln v) can land an ulp-scale amount above v
        return min(val, u, v)

    # kinks of u -> C(u, v) in (0, 1) for fixed v
    def _kinks_in_u(self, v: float) -> list[float]:
        return []

    def conditional_2_given_1(self, v: float, u: float) -> Conditional:
        """C_{2|1}(v | u) = dC/du, by finite differences away from kinks."""
        _check_cond_args(v, u)
        return _fd_partial_u(self, v, u)


def _check_cond_args(v, u):
    _check_unit("v", v)
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in the open interval (0, 1), got {u}")


def _fd_partial_u(cop: Copula, v: float, u: float) -> Conditional:
    h = min(FD_STEP, 0.5 * u, 0.5 * (1.0 - u))
    kinks = [k for k in cop._kinks_in_u(v) if 0.0 < k < 1.0]
    near = any(abs(u - k) <= KINK_TOL for k in kinks)
    close = [k for k in kinks if abs(u - k) < 2.0 * h]
    f = lambda x: cop.cdf(x, v)  # noqa: E731
    if not close:
        return Conditional((f(u + h) - f(u - h)) / (2.0 * h), near)
    k = min(close, key=lambda c: abs(u - c))
    # second-order one-sided stencil on the side away from the kink
    if k >= u and u - 2.0 * h > 0.0:
        val = (3.0 * f(u) - 4.0 * f(u - h) + f(u - 2.0 * h)) / (2.0 * h)
    else:
        val = (-3.0 * f(u) + 4.0 * f(u + h) - f(u + 2.0 * h)) / (2.0 * h)
    return Conditional(val, near)


@dataclass(frozen=True)
class Independence(Copula):
    family: ClassVar[str] = "indep"

    def _log_cdf_interior(self, u, v):
        return np.log(u) + np.log(v)

    def _cdf_interior(self, u, v):
        return u * v

    def conditional_2_given_1(self, v, u):
        _check_cond_args(v, u)
        return Conditional(float(v))


@dataclass(frozen=True)
class NelsenEx33(Copula):
    """Copula with mass on two segments; theta=1 is M, theta=0 is W."""

    theta: float
    family: ClassVar[str] = "nelsen33"
    symmetric: ClassVar[bool] = False

    def __post_init__(self):
        _check_unit("theta", self.theta)

    def _linear(self, u, v):
        th = self.theta
        # first matching branch wins on the shared boundaries
        return np.where(
            u <= th * v,
            u,
            np.where(u < 1.0 - (1.0 - th) * v, th * v, u + v - 1.0),
        )

    def _log_cdf_interior(self, u, v):
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(self._linear(u, v), 0.0))

    def _cdf_interior(self, u, v):
        return float(max(self._linear(np.float64(u), np.float64(v)), 0.0))

    def _kinks_in_u(self, v):
        return [self.theta * v, 1.0 - (1.0 - self.theta) * v]


@dataclass(frozen=True)
class MarshallOlkin(Copula):
    """C(u, v) = min(u^(1-a) v, u v^(1-b))."""

    a: float
    b: float
    family: ClassVar[str] = "mo"

    def __post_init__(self):
        _check_unit("a", self.a)
        _check_unit("b", self.b)

    @property
    def symmetric(self):
        return self.a == self.b

    def _log_cdf_interior(self, u, v):
        lu, lv = np.log(u), np.log(v)
        return np.minimum((1.0 - self.a) * lu + lv, lu + (1.0 - self.b) * lv)

    def _cdf_interior(self, u, v):
        return min(u ** (1.0 - self.a) * v, u * v ** (1.0 - self.b))

    def _kinks_in_u(self, v):
        # branches meet where u^a = v^b
        if self.a == 0.0:
            return []
        return [v ** (self.b / self.a)]


@dataclass(frozen=True)
class Gaussian(Copula):
    rho: float
    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if not (-1.0 < self.rho < 1.0):
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")

    def _log_cdf_interior(self, u, v):
        if self.rho == 0.0:
            return np.log(u) + np.log(v)
        return log_bvn_cdf_array(quantile_array(u), quantile_array(v), self.rho)

    def _cdf_interior(self, u, v):
        if self.rho == 0.0:
            return u * v
        return super()._cdf_interior(u, v)

    def conditional_2_given_1(self, v, u):
        _check_cond_args(v, u)
        if v == 0.0 or v == 1.0:
            return Conditional(float(v))
        sig = math.sqrt((1.0 - self.rho) * (1.0 + self.rho))
        arg = (std_normal_quantile(v) - self.rho * std_normal_quantile(u)) / sig
        return Conditional(float(std_normal_cdf(arg)))


@dataclass(frozen=True)
class PickandsParams:
    """Asymmetric logistic Pickands function

    A(t) = (1 - psi1)(1 - t) + (1 - psi2) t + ((psi1 (1 - t))^(1/s) + (psi2 t)^(1/s))^s
    """

    s: float
    psi1: float
    psi2: float

    def __post_init__(self):
        if not (0.0 < self.s <= 1.0):
            raise ValueError(f"s must lie in (0, 1], got {self.s}")
        _check_unit("psi1", self.psi1)
        _check_unit("psi2", self.psi2)

    def __call__(self, t):
        return pickands(self, t)


def pickands(params: PickandsParams, t):
    """A_1(t) of the asymmetric logistic family; vectorised over t."""
    t = np.asarray(t, dtype=float)
    x1 = params.psi1 * (1.0 - t)
    x2 = params.psi2 * t
    top = np.maximum(x1, x2)
    safe = np.where(top > 0.0, top, 1.0)
    r = 1.0 / params.s
    power_mean = top * ((x1 / safe) ** r + (x2 / safe) ** r) ** params.s
    out = (1.0 - params.psi1) * (1.0 - t) + (1.0 - params.psi2) * t + power_mean
    return out if out.ndim else float(out)


def _log_ev_cdf(params: PickandsParams, lu, lv):
    luv = lu + lv
    return luv * pickands(params, lv / luv)


@dataclass(frozen=True)
class EvcMixture(Copula):
    """Equal mixture of the extreme-value copulas of A_1 and A_2(t) = A_1(1 - t)."""

    pickands: PickandsParams
    family: ClassVar[str] = "evcmix"

    @property
    def params(self):
        p = self.pickands
        return {"s": p.s, "psi1": p.psi1, "psi2": p.psi2}

    def _log_cdf_interior(self, u, v):
        lu, lv = np.log(u), np.log(v)
        # the mirrored component is the first one with arguments swapped
        return np.logaddexp(_log_ev_cdf(self.pickands, lu, lv), _log_ev_cdf(self.pickands, lv, lu)) - math.log(2.0)


def evc_mixture_cdf(params: PickandsParams, u: float, v: float) -> float:
    if u == 0.0 or v == 0.0:
        return 0.0
    return EvcMixture(params).cdf(u, v)


def pickands_derivatives(params: PickandsParams, t: float = 0.5, h: float = PICKANDS_FD_STEP):
    """(A(t), A'(t), A''(t)) by central differences."""
    a_m, a_0, a_p = pickands(params, np.array([t - h, t, t + h]))
    return a_0, (a_p - a_m) / (2.0 * h), (a_p - 2.0 * a_0 + a_m) / (h * h)


def mixture_diagonal_convexity_margin(params: PickandsParams, u: float) -> float:
    """Second t-derivative at t = 1/2 of q^A1(t) + q^A1(1-t) with q = u^2.

    Along the section x -> C(x, u^2/x) the mixture equals
    (q^A1(t) + q^A1(1-t)) / 2 with t = ln(u^2/x) / ln q, so a positive margin
    means the section is locally convex at x = u and the diagonal is not a
    section maximum.
    """
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie in (0, 1), got {u}")
    a0, a1, a2 = pickands_derivatives(params)
    lq = 2.0 * math.log(u)
    return 2.0 * math.exp(a0 * lq) * lq * (a1 * a1 * lq + a2)


_FAMILIES = {
    "indep": (Independence, ()),
    "independence": (Independence, ()),
    "nelsen33": (NelsenEx33, ("theta",)),
    "mo": (MarshallOlkin, ("a", "b")),
    "gaussian": (Gaussian, ("rho",)),
    "evcmix": (EvcMixture, ("s", "psi1", "psi2")),
}


def parse_spec(text: str) -> Copula:
    """Parse ``family[:k=v,...]`` into a copula instance."""
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    if name not in _FAMILIES:
        raise ValueError(f"unknown copula family {name!r}")
    cls, required = _FAMILIES[name]
    kwargs = {}
    if body.strip():
        for item in body.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {item!r} in {text!r}")
            try:
                kwargs[key.strip()] = float(val)
            except ValueError:
                raise ValueError(f"parameter {key.strip()!r} is not a number: {val!r}") from None
    if set(kwargs) != set(required):
        raise ValueError(f"{name} expects parameters {list(required)}, got {sorted(kwargs)}")
    if cls is EvcMixture:
        return EvcMixture(PickandsParams(**kwargs))
    return cls(**kwargs)


def cdf(spec: Copula, u: float, v: float) -> float:
    return spec.cdf(u, v)


def conditional_2_given_1(spec: Copula, v: float, u: float) -> Conditional:
    return spec.conditional_2_given_1(v, u)
