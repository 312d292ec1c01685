import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resodecay.decay import (
    FULL_LINE,
    TRUNCATED,
    ChannelRates,
    full_line_lorentzian,
    late_time_slope,
    loglog_slope,
    lorentzian_norm,
    mean_lifetime,
    normalize_density,
    rate_curves,
    survival_curve,
    survival_probability,
    truncated_lorentzian,
    ww_deviation,
)
from resodecay.errors import BadParams, BadWeights, NegativeTime
from resodecay.quadrature import QuadratureSpec


class TestNormalize:
    def test_full_line(self):
        assert normalize_density(FULL_LINE, 2.0, 0.4).norm == pytest.approx(0.4 / (2 * math.pi))

    def test_far_threshold_limit(self):
        assert lorentzian_norm(1e9, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-9)

    def test_closed_form_vs_quadrature(self):
        closed = normalize_density(TRUNCATED, 100.0, 1.0)
        quad = normalize_density(TRUNCATED, 100.0, 1.0, spec=QuadratureSpec())
        assert quad.norm == pytest.approx(closed.norm, rel=1e-10)

    @given(st.floats(0.0, 50.0), st.floats(0.05, 5.0))
    def test_renormalization_stable(self, er, g):
        rho = truncated_lorentzian(er, g)
        assert abs(rho.renormalized().norm / rho.norm - 1) <= 1e-12

    @pytest.mark.parametrize("args", [(TRUNCATED, 1.0, 0.0), (TRUNCATED, 1.0, -1.0), ("gauss", 1.0, 1.0)])
    def test_bad_params(self, args):
        with pytest.raises(BadParams):
            normalize_density(*args)


class TestSurvival:
    def test_t_zero(self):
        _, p = survival_probability(truncated_lorentzian(2.0, 0.2), 0.0)
        assert p == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("t", [0.5, 3.0, 20.0])
    def test_full_line_exponential(self, t):
        rho = full_line_lorentzian(2.0, 0.5)
        _, p = survival_probability(rho, t)
        assert p == pytest.approx(math.exp(-0.5 * t), rel=1e-9)
        assert abs(ww_deviation(rho, t)) < 1e-10

    def test_truncated_at_tau(self):
        rho = truncated_lorentzian(100.0, 1.0)
        _, p = survival_probability(rho, 1.0)
        tight = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)
        _, p_ref = survival_probability(rho, 1.0, tight)
        assert abs(p - p_ref) < 1e-10
        assert abs(p - math.exp(-1)) <= 5e-3

    def test_late_time_power_law_dominates(self):
        rho = truncated_lorentzian(100.0, 1.0)
        t = 100.0
        dev = ww_deviation(rho, t)
        _, p = survival_probability(rho, t)
        assert dev == pytest.approx(p, rel=1e-12)
        assert p == pytest.approx((rho(0.0) / t) ** 2, rel=0.05)

    def test_bounds(self):
        curve = survival_curve(truncated_lorentzian(5.0, 1.0), np.linspace(0, 10, 21))
        assert np.all(curve.probabilities <= 1 + 1e-10) and np.all(curve.probabilities >= 0)

    @given(st.floats(0.01, 100.0))
    def test_time_symmetry(self, t):
        rho = truncated_lorentzian(10.0, 1.0)
        a, p = survival_probability(rho, t)
        b, q = survival_probability(rho, -t)
        assert abs(a - b.conjugate()) < 1e-10
        assert abs(p - q) <= 1e-8

    def test_negative_deviation_time(self):
        with pytest.raises(NegativeTime):
            ww_deviation(truncated_lorentzian(5.0, 1.0), -1.0)


class TestRates:
    def test_initial(self):
        rates, probs = rate_curves(ChannelRates((0.5, 1.5)), 0.0)
        assert [float(r) for r in rates] == [0.5, 1.5] and [float(p) for p in probs] == [0.0, 0.0]

    def test_example(self):
        rates, _ = rate_curves(ChannelRates((0.5, 1.5)), 0.5)
        assert [float(r) for r in rates] == pytest.approx([0.5 / math.e, 1.5 / math.e])

    @given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=4).filter(lambda r: sum(r) > 0.01),
           st.floats(0.0, 20.0))
    def test_conservation(self, r, t):
        ch = ChannelRates(tuple(r))
        _, probs = rate_curves(ch, t)
        assert sum(float(p) for p in probs) + math.exp(-ch.total * t) == pytest.approx(1.0, abs=1e-14)

    def test_derivative(self):
        ch, t, h = ChannelRates((0.2, 0.7)), 1.3, 1e-6
        rates, _ = rate_curves(ch, t)
        _, up = rate_curves(ch, t + h)
        _, dn = rate_curves(ch, t - h)
        for r, a, b in zip(rates, up, dn):
            assert (a - b) / (2 * h) == pytest.approx(float(r), rel=1e-8)

    @pytest.mark.parametrize("r", [(), (-1.0, 2.0), (0.0, 0.0), (math.nan,)])
    def test_bad_weights(self, r):
        with pytest.raises(BadWeights):
            ChannelRates(r)

    def test_negative_time(self):
        with pytest.raises(NegativeTime):
            rate_curves(ChannelRates((1.0,)), -1.0)


class TestMeanLifetime:
    def test_exponential_callable(self):
        est = mean_lifetime(lambda t: np.exp(-2.0 * t), t_max=40.0)
        assert est.tau == pytest.approx(0.5, rel=1e-9)

    def test_full_line(self):
        est = mean_lifetime(full_line_lorentzian(2.0, 0.5))
        assert est.tau == pytest.approx(2.0, rel=1e-8)

    def test_truncated_reports_residual(self):
        est = mean_lifetime(truncated_lorentzian(100.0, 1.0))
        assert abs(est.deviation) <= 1e-2
        assert est.deviation == pytest.approx(est.tau * 1.0 - 1)

    def test_curve_input(self):
        rho = full_line_lorentzian(2.0, 1.0)
        curve = survival_curve(rho, np.linspace(0, 40, 4001))
        assert mean_lifetime(curve).tau == pytest.approx(1.0, rel=1e-5)


def test_loglog_slope_exact():
    t = np.geomspace(1, 100, 20)
    assert loglog_slope(t, 3.0 * t ** -2) == pytest.approx(-2.0)


def test_late_time_slope_resolves_interference():
    rho = truncated_lorentzian(100.0, 1.0)
    slope, times = late_time_slope(rho, 30.0, 100.0)
    assert times.size >= 8 * 70 * 100 / (2 * np.pi)
    assert slope == pytest.approx(-2.0, abs=0.01)
    # the estimate is stable once the interference period is resolved
    denser, _ = late_time_slope(rho, 30.0, 100.0, points_per_period=16)
    assert denser == pytest.approx(slope, abs=1e-3)


def test_late_time_slope_bad_range():
    with pytest.raises(ValueError):
        late_time_slope(truncated_lorentzian(2.0, 0.2), 5.0, 1.0)
