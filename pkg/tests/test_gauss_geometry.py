import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from maxtail import gauss_geometry as gg
from maxtail.maxdep import critical_residual_gaussian
from maxtail.special_fns import std_normal_quantile

PI = math.pi


class TestLevelZ:
    def test_examples(self):
        assert gg.level_z(0.0, 0.25) == 0.0
        assert gg.level_z(0.0, 0.1) == pytest.approx(std_normal_quantile(0.2), abs=1e-14)

    def test_beyond_asymptote(self):
        with pytest.raises(ValueError):
            gg.level_z(std_normal_quantile(0.1), 0.1)
        with pytest.raises(ValueError):
            gg.level_z(-3.0, 0.1)
        with pytest.raises(ValueError):
            gg.level_z(0.0, 1.0)

    @pytest.mark.parametrize("alpha", gg.DEFAULT_ALPHAS)
    def test_on_curve_symmetric_convex(self, alpha):
        w = np.linspace(std_normal_quantile(alpha) + 0.05, 8.0, 3001)
        z = gg.level_z_array(w, alpha)
        assert np.abs(ndtr(w) * ndtr(z) - alpha).max() <= 1e-12
        assert np.diff(z, 2).min() >= -1e-10
        for v in np.linspace(std_normal_quantile(alpha) + 0.5, 3.0, 25):
            assert gg.level_z(gg.level_z(v, alpha), alpha) == pytest.approx(v, abs=1e-9)
        assert abs(gg.level_z(10.0, alpha) - std_normal_quantile(alpha)) <= 1e-8

    def test_array_matches_scalar(self):
        w = np.array([-0.5, 0.0, 1.3, 6.0])
        assert gg.level_z_array(w, 0.2) == pytest.approx([gg.level_z(x, 0.2) for x in w], abs=1e-15)


class TestPolarRadius:
    def test_axis_and_diagonal(self):
        assert gg.curve_polar_radius(0.1, 1.5 * PI) == pytest.approx(-std_normal_quantile(0.2), abs=1e-12)
        w0 = std_normal_quantile(math.sqrt(0.6))
        assert gg.curve_polar_radius(0.6, PI / 4) == pytest.approx(math.sqrt(2) * w0, abs=1e-12)

    def test_quarter_touches_origin(self):
        for th in (3 * PI / 4 - 1e-7, 7 * PI / 4 + 1e-7):
            assert gg.curve_polar_radius(0.25, th) <= 1e-6

    @pytest.mark.parametrize("alpha", [0.05, 0.1, 0.25, 0.3, 0.45, 0.5, 0.8])
    def test_residual(self, alpha):
        th = np.concatenate([np.linspace(lo + 1e-3, hi - 1e-3, 200) for lo, hi, _ in gg.polar_span(alpha)])
        r = gg.polar_radius_array(alpha, th)
        res = np.abs(ndtr(r * np.cos(th)) * ndtr(r * np.sin(th)) - alpha)
        assert res.max() <= 1e-11

    @pytest.mark.parametrize("alpha,theta", [(0.1, 0.3), (0.1, PI / 2), (0.6, PI), (0.3, 3.5), (0.25, PI)])
    def test_outside_span(self, alpha, theta):
        with pytest.raises(ValueError):
            gg.curve_polar_radius(alpha, theta)

    @pytest.mark.parametrize("alpha", [0.5, 0.6, 0.8])
    def test_v_shape_first_quadrant(self, alpha):
        th = np.linspace(1e-3, PI / 2 - 1e-3, 2001)
        r = gg.polar_radius_array(alpha, th)
        assert np.all(np.diff(r[th < PI / 4]) < 0)
        assert np.all(np.diff(r[th > PI / 4]) > 0)

    @pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
    def test_v_shape_third_quadrant(self, alpha):
        th = np.linspace(PI + 0.3, 1.5 * PI - 0.3, 2001)
        r = gg.polar_radius_array(alpha, th)
        assert np.all(np.diff(r[th < 1.25 * PI]) < 0)
        assert np.all(np.diff(r[th > 1.25 * PI]) > 0)

    @pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
    def test_fourth_quadrant_radius_grows(self, alpha):
        w = np.linspace(1e-3, 8.0, 2000)
        z = gg.level_z_array(w, alpha)
        assert np.all(np.diff(np.hypot(w, z)) > 0)


class TestRadialDerivative:
    def test_diagonal_zero(self):
        assert gg.radial_log_derivative(-0.4, -0.4) == 0.0
        assert gg.radial_numerator(1.1, 1.1) == 0.0

    def test_numerator_sign(self):
        assert gg.radial_numerator(-0.5, -1.5) > 0
        assert gg.radial_numerator(-1.5, -0.5) < 0

    @pytest.mark.parametrize(
        "alpha,theta", [(0.1, 5 * PI / 4 + 0.2), (0.1, 5 * PI / 4 - 0.3), (0.1, 1.8 * PI), (0.6, 0.3), (0.6, 1.2), (0.3, 0.2)]
    )
    def test_matches_finite_difference(self, alpha, theta):
        h = 1e-5
        r = gg.curve_polar_radius(alpha, theta)
        fd = (gg.curve_polar_radius(alpha, theta + h) - gg.curve_polar_radius(alpha, theta - h)) / (2 * h)
        assert gg.radial_log_derivative(r * math.cos(theta), r * math.sin(theta)) * r == pytest.approx(fd, abs=1e-6)

    def test_singular_point(self):
        # denominator vanishes where the ray is tangent (origin)
        with pytest.raises(ZeroDivisionError):
            gg.radial_log_derivative(0.0, 0.0)


class TestLambdaMap:
    def test_diagonal_on_line_l(self):
        for rho in (-0.6, 0.2, 0.8):
            w, z = gg.lambda_map(0.05, 0.05, rho)
            assert z == pytest.approx(w * gg.line_l_slope(rho), rel=1e-12)

    def test_rho_zero(self):
        w, z = gg.lambda_map(0.2, 0.1, 0.0)
        assert w == std_normal_quantile(0.1)
        assert z == std_normal_quantile(0.4)

    def test_origin(self):
        assert gg.lambda_map_inverse(0.0, 0.0, 0.3) == (0.5, 0.5)

    def test_domain(self):
        with pytest.raises(ValueError):
            gg.lambda_map(0.1, 0.001, 0.5)
        with pytest.raises(ValueError):
            gg.lambda_map(0.1, 0.5, -1.0)

    def test_round_trip_and_equation_equivalence(self):
        rng = np.random.default_rng(2024)
        n = 0
        while n < 1000:
            rho = rng.uniform(-0.95, 0.95)
            u = rng.uniform(0.01, 0.99)
            x = math.exp(rng.uniform(2 * math.log(u), 0.0))
            if not (u * u < x < 1.0):
                continue
            n += 1
            w, z = gg.lambda_map(u, x, rho)
            u2, x2 = gg.lambda_map_inverse(w, z, rho)
            assert abs(u2 - u) <= 1e-10 and abs(x2 - x) <= 1e-10
            wr, zr = gg.rotate(w, z, math.asin(rho))
            r16 = ndtr(w) * ndtr(z) - ndtr(wr) * ndtr(zr)
            assert critical_residual_gaussian(u, x, rho) == pytest.approx(r16, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6), st.floats(-0.99, 0.99))
def test_inverse_lands_in_domain(w, z, rho):
    u, x = gg.lambda_map_inverse(w, z, rho)
    assert 0 < u < 1 and u * u <= x <= 1


class TestProbe:
    def test_quarter_origin(self):
        p = gg.intersection_probe(0.25, PI / 6)
        assert p.n_intersections == 1 and p.origin_on_curve
        assert math.hypot(*p.intersections[0]) <= 1e-10

    def test_small_alpha(self):
        assert gg.intersection_probe(0.1, PI / 6).n_intersections == 1

    def test_on_line_l(self):
        beta = PI / 3
        rho = math.sin(beta)
        p = gg.intersection_probe(0.6, beta)
        (w, z), = p.intersections
        assert z == pytest.approx(w * gg.line_l_slope(rho), rel=1e-9)
        u, x = gg.lambda_map_inverse(w, z, rho)
        assert x == pytest.approx(u, rel=1e-9)
        w_d, z_d = gg.lambda_map(u, u, rho)
        assert (w, z) == pytest.approx((w_d, z_d), abs=1e-8)

    @pytest.mark.parametrize("beta", [0.0, PI / 2, -0.1])
    def test_beta_domain(self, beta):
        with pytest.raises(ValueError):
            gg.intersection_probe(0.3, beta)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            gg.intersection_probe(0.3, 0.5, resolution=999)

    def test_radius_profile_attached(self):
        p = gg.intersection_probe(0.6, 0.4, radius_points=50)
        th, r = p.radius_profile
        assert len(th) == len(r) == 50

    def test_rows(self):
        rows = gg.probe_rows(gg.intersection_probe(0.4, 0.5))
        assert len(rows) == 1 and rows[0][:3] == (0.4, 0.5, 1)

    @pytest.mark.parametrize("alpha", [a for a in gg.DEFAULT_ALPHAS if not 0.25 < a < 0.5])
    def test_polar_count_agrees(self, alpha):
        for beta in gg.DEFAULT_BETAS:
            assert gg.polar_intersection_count(alpha, beta) == 1

    def test_polar_count_not_star_shaped(self):
        with pytest.raises(ValueError):
            gg.polar_intersection_count(0.3, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(0.02, PI / 2 - 0.02))
def test_unique_intersection_property(alpha, beta):
    p = gg.intersection_probe(alpha, beta)
    assert p.n_intersections == 1
    assert p.max_residual <= 1e-10
    # the intersection is the image of the diagonal point for rho = sin(beta)
    (w, z), = p.intersections
    u, x = gg.lambda_map_inverse(w, z, math.sin(beta))
    assert x == pytest.approx(u, rel=1e-8)
