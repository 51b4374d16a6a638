import numpy as np
import pytest

from semient import bec_analytic
from semient.bec_analytic import (alphas_from_points, analytic_rle, analytic_series, beta,
                                  revival_time)
from semient.dynamics import Propagator, entropy_series
from semient.models import BecParams, build_bec, initial_state

ALPHAS = alphas_from_points(1, 1, 1, 1, 1.0)
ARGS = dict(omega=1.0, lam=0.2, g=0.1, hbar=1.0)


class TestBeta:
    def test_start(self):
        b = beta(0.0, ALPHAS, 1.0, 0.2)
        assert (b.beta1, b.beta2) == pytest.approx(ALPHAS)

    def test_no_hopping(self):
        a = (0.7 - 0.2j, 1.1j)
        for t in (0.3, 2.0, 7.5):
            b = beta(t, a, 1.3, 0.0)
            assert b.beta1 == pytest.approx(a[0] * np.exp(-1.3j * t))
            assert abs(b.beta1) == pytest.approx(abs(a[0]))

    def test_quarter_swap(self):
        a = (0.7 - 0.2j, 1.1j)
        b = beta(np.pi / 2 / 0.2, a, 1.0, 0.2)
        assert abs(b.beta1) == pytest.approx(abs(a[1]))

    def test_total_number_conserved(self):
        a = (0.7 - 0.2j, 1.1j)
        for t in np.linspace(0, 20, 7):
            b = beta(t, a, 1.0, 0.37)
            assert abs(b.beta1) ** 2 + abs(b.beta2) ** 2 == pytest.approx(
                abs(a[0]) ** 2 + abs(a[1]) ** 2)


class TestAnalytic:
    def test_zero_at_start(self):
        assert abs(analytic_rle(0.0, ALPHAS, **ARGS)) <= 1e-14

    def test_no_interaction(self):
        t = np.linspace(0, 50, 101)
        s = analytic_series(t, ALPHAS, 1.0, 0.2, 0.0, 1.0)
        assert np.max(np.abs(s)) <= 1e-14

    @pytest.mark.parametrize("hbar", [1.0, 0.5, 0.1])
    def test_revivals(self, hbar):
        alphas = alphas_from_points(1, 1, 1, 1, hbar)
        T = revival_time(0.1, hbar)
        for k in range(4):
            assert abs(analytic_rle(k * T, alphas, 1.0, 0.2, 0.1, hbar)) <= 1e-12

    def test_symmetric_about_revival(self):
        T = revival_time(0.1, 1.0)
        for dt in (0.7, 3.1):
            # beta(t) changes with t, so compare only the number-kernel part via lam = 0
            a = analytic_rle(T - dt, ALPHAS, 1.0, 0.0, 0.1, 1.0)
            b = analytic_rle(T + dt, ALPHAS, 1.0, 0.0, 0.1, 1.0)
            assert a == pytest.approx(b, abs=1e-12)

    def test_bounds(self):
        s = analytic_series(np.linspace(0, 31, 63), ALPHAS, **ARGS)
        assert np.all(s >= -1e-14) and np.all(s < 1)

    def test_truncation_doubling(self, monkeypatch):
        t = np.linspace(0.5, 30, 12)
        base = analytic_series(t, ALPHAS, **ARGS)
        narrow = bec_analytic._poisson_support

        def doubled(mean, tol):
            lo, hi = narrow(mean, tol)
            half = (hi - lo) // 2 + 1
            return max(0, lo - half), hi + half

        monkeypatch.setattr(bec_analytic, "_poisson_support", doubled)
        wide = analytic_series(t, ALPHAS, **ARGS)
        assert np.max(np.abs(wide - base)) < 10 * 1e-12

    def test_matches_truncated_dynamics(self):
        p = BecParams(n_max=30)
        psi, _, _ = initial_state(p, (1, 1, 1, 1))
        t = np.linspace(0, revival_time(0.1, 1.0), 81)
        num = entropy_series(psi, Propagator(build_bec(p)), t).values
        assert np.max(np.abs(num - analytic_series(t, ALPHAS, **ARGS))) <= 1e-6


class TestRevivalTime:
    def test_values(self):
        assert revival_time(0.1, 1.0) == pytest.approx(10 * np.pi)
        assert revival_time(0.1, 0.1) == pytest.approx(100 * np.pi)
        assert revival_time(0.2, 1.0) == pytest.approx(revival_time(0.1, 1.0) / 2)

    def test_undefined(self):
        with pytest.raises(ValueError):
            revival_time(0.0, 1.0)
