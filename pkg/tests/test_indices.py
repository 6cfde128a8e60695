import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxtail.copulas import Copula, EvcMixture, Gaussian, Independence, MarshallOlkin, NelsenEx33, PickandsParams
from maxtail.indices import (
    GridSpec,
    chi_estimate,
    default_u_min,
    index_report,
    kappa_estimate,
    lambda_estimate,
    secant_from_one,
)

SHORT = GridSpec(u_max=0.1, u_min=1e-6, points=9)


@dataclass(frozen=True)
class Swapped(Copula):
    """C(v, u) for a wrapped copula."""

    inner: Copula
    family: ClassVar[str] = "swapped"

    @property
    def params(self):
        return {}

    def _log_cdf_interior(self, u, v):
        return self.inner._log_cdf_interior(v, u)


class TestGrid:
    def test_defaults(self):
        g = GridSpec()
        u = g.u_grid(Gaussian(0.5))
        assert len(u) == 15 and u[0] == pytest.approx(0.1) and u[-1] == pytest.approx(1e-8)
        assert GridSpec().u_grid(Independence())[-1] == pytest.approx(1e-6)
        assert np.all(np.diff(u) < 0)
        assert default_u_min(None) == 1e-6

    @pytest.mark.parametrize("kw", [dict(points=2), dict(u_max=1.0), dict(u_min=0.5)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            GridSpec(**kw)


class TestEstimators:
    def test_lambda_nelsen(self):
        u = SHORT.u_grid()
        cop = NelsenEx33(0.36)
        est = lambda_estimate([cop.cdf(x, x) for x in u], u)
        assert est.trajectory == pytest.approx(np.full(len(u), 0.36), abs=1e-12)

    def test_lambda_zero_flag(self):
        est = lambda_estimate([0.01, 0.0, 0.0], [0.1, 0.01, 0.001])
        assert est.estimate == 0.0 and est.flags

    def test_chi_comonotone_and_independent(self):
        u = SHORT.u_grid()
        assert chi_estimate(np.log(u), u).trajectory == pytest.approx(np.ones(len(u)), abs=1e-15)
        assert chi_estimate(2 * np.log(u), u).trajectory == pytest.approx(np.zeros(len(u)), abs=1e-15)

    def test_chi_skips_value_one(self):
        est = chi_estimate([0.0, math.log(0.01), math.log(1e-4)], [0.5, 0.1, 0.01])
        assert math.isnan(est.trajectory[0]) and est.flags
        assert est.estimate == pytest.approx(0.0)

    def test_kappa_needs_three_points(self):
        with pytest.raises(ValueError):
            kappa_estimate([-1.0, -2.0], [0.1, 0.01])

    def test_kappa_flags_out_of_range(self):
        u = np.array([0.1, 0.01, 0.001])
        assert kappa_estimate(3 * np.log(u), u).flags

    def test_grid_must_decrease(self):
        with pytest.raises(ValueError):
            kappa_estimate([-3.0, -2.0, -1.0], [0.001, 0.01, 0.1])

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1.0, 2.0), st.floats(-3.0, 0.0))
    def test_kappa_exact_for_power_laws(self, kappa, log_c):
        u = SHORT.u_grid()
        est = kappa_estimate(log_c + kappa * np.log(u), u)
        assert np.allclose(est.trajectory, kappa, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1.0, 2.0))
    def test_chi_secant_identity(self, kappa):
        u = SHORT.u_grid()
        lv = kappa * np.log(u) + 0.1 * np.log(-np.log(u))
        chi = chi_estimate(lv, u).trajectory
        assert chi == pytest.approx(2.0 / secant_from_one(lv, u) - 1.0, abs=1e-9)


class TestReports:
    def test_independence(self):
        rep = index_report(Independence(), SHORT)
        s = rep.summary()
        assert s["lambda_diag"] == pytest.approx(0.0, abs=1e-5)
        assert s["chi_diag"] == s["chi_star"] == 0.0
        assert np.all(rep.kappa_diag.trajectory == 2.0) and np.all(rep.kappa_star.trajectory == 2.0)

    def test_marshall_olkin(self):
        rep = index_report(MarshallOlkin(0.3, 0.6), SHORT)
        assert rep.kappa_diag.estimate == pytest.approx(1.7, abs=1e-9)
        assert rep.kappa_star.estimate == pytest.approx(1.6, abs=1e-9)
        sym = index_report(MarshallOlkin(0.5, 0.5), SHORT)
        assert sym.kappa_diag.trajectory == pytest.approx(np.full(len(SHORT.u_grid()) - 1, 1.5), abs=1e-12)

    def test_nelsen(self):
        rep = index_report(NelsenEx33(0.36), SHORT)
        assert rep.lambda_star.trajectory == pytest.approx(np.full(len(rep.u_grid), 0.6), abs=1e-9)
        # lambda > 0 forces kappa -> 1
        assert rep.kappa_diag.trajectory[-1] == pytest.approx(1.0, abs=1e-9)

    def test_gaussian_diag_lambda_vanishing(self):
        u = GridSpec(u_max=0.1, u_min=1e-6, points=6).u_grid()
        cop = Gaussian(0.5)
        est = lambda_estimate([cop.cdf(x, x) for x in u], u)
        assert est.estimate < 1e-2
        assert np.all(np.diff(est.trajectory) < 0)

    def test_gaussian_swap_invariance(self):
        cop = Gaussian(0.6)
        a = index_report(cop, SHORT)
        b = index_report(Swapped(cop), SHORT)
        assert a.log_pi_star == pytest.approx(b.log_pi_star, rel=1e-12)
        assert a.kappa_star.estimate == pytest.approx(b.kappa_star.estimate, abs=1e-9)

    @pytest.mark.parametrize(
        "cop",
        [Gaussian(0.3), Gaussian(0.8), MarshallOlkin(0.2, 0.9), NelsenEx33(0.49),
         EvcMixture(PickandsParams(0.3, 0.9, 0.2)), Independence()],
        ids=str,
    )
    def test_prudence_ordering(self, cop):
        rep = index_report(cop, SHORT)
        assert np.all(rep.log_pi_star >= rep.log_c_diag)
        assert np.all(rep.lambda_star.trajectory >= rep.lambda_diag.trajectory - 1e-9)
        assert np.all(rep.kappa_star.trajectory <= rep.kappa_diag.trajectory + 1e-9)
        lam = rep.lambda_star.estimate
        assert 0.0 <= rep.lambda_diag.estimate <= 1.0 and 0.0 <= lam <= 1.0
        for k in (rep.kappa_diag.estimate, rep.kappa_star.estimate):
            assert 0.9 <= k <= 2.1
        assert math.isfinite(rep.kappa_star.last_delta)
