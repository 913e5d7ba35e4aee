"""Exponent fitting, kink detection, and the parameter scan."""

import numpy as np
import pytest

from dimer_otoc import analysis
from dimer_otoc.analysis import (detect_kink, fit_exponent, fit_windows,
                                 scan_to_csv, theta_scan)
from dimer_otoc.hilbert import DimerParams
from dimer_otoc.propagate import OtocSeries
from dimer_otoc.separatrix import time_scales


def make_series(times, values):
    return OtocSeries(times=np.asarray(times), values=np.asarray(values))


class TestFitExponent:
    def test_exact_exponential(self):
        t = np.linspace(0.0, 5.0, 100)
        fit = fit_exponent(make_series(t, np.exp(2 * 0.97 * t)), (0.0, 5.0))
        assert fit.slope == pytest.approx(1.94, rel=1e-10)
        assert fit.stderr == pytest.approx(0.0, abs=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_piecewise_sides_recovered(self):
        lam, tau = 0.8, 3.0
        t = np.linspace(0.0, 6.0, 300)
        v = np.where(t < tau, np.exp(2 * lam * t),
                     np.exp(2 * lam * tau + lam * (t - tau)))
        s = make_series(t, v)
        assert fit_exponent(s, (0.0, tau)).slope == pytest.approx(2 * lam,
                                                                  abs=1e-3)
        assert fit_exponent(s, (tau, 6.0)).slope == pytest.approx(lam, abs=1e-3)

    def test_affine_equivariance(self):
        t = np.linspace(0.5, 4.0, 60)
        v = np.exp(1.3 * t) * (1 + 0.05 * np.sin(5 * t))
        f1 = fit_exponent(make_series(t, v), (0.5, 4.0))
        f2 = fit_exponent(make_series(t, 17.3 * v), (0.5, 4.0))
        assert f2.slope == pytest.approx(f1.slope, abs=1e-12)
        assert f2.intercept == pytest.approx(f1.intercept + np.log(17.3),
                                             abs=1e-10)

    def test_insufficient_points(self):
        t = np.linspace(0.0, 1.0, 4)
        with pytest.raises(ValueError):
            fit_exponent(make_series(t, np.exp(t)), (0.0, 1.0))

    def test_invalid_window(self):
        t = np.linspace(0.0, 1.0, 50)
        with pytest.raises(ValueError):
            fit_exponent(make_series(t, np.exp(t)), (1.0, 0.0))


class TestDetectKink:
    def test_synthetic_kink_located(self):
        lam, tau = 0.97, 4.0
        t = np.linspace(0.5, 7.5, 250)
        v = np.where(t < tau, np.exp(2 * lam * t),
                     np.exp(2 * lam * tau + lam * (t - tau)))
        k = detect_kink(make_series(t, v), (0.5, 7.5))
        assert k.found
        assert k.time == pytest.approx(tau, abs=0.1)
        assert k.slope_before == pytest.approx(2 * lam, abs=0.05)
        assert k.slope_after == pytest.approx(lam, abs=0.05)

    def test_pure_exponential_reports_no_kink(self):
        t = np.linspace(0.5, 7.5, 200)
        k = detect_kink(make_series(t, np.exp(1.94 * t)), (0.5, 7.5))
        assert not k.found

    def test_noisy_kink_located(self):
        rng = np.random.default_rng(0)
        lam, tau = 0.97, 4.0
        t = np.linspace(0.5, 7.5, 250)
        log_v = np.where(t < tau, 2 * lam * t, 2 * lam * tau + lam * (t - tau))
        log_v = log_v + rng.normal(0.0, 0.05, size=t.size)
        k = detect_kink(make_series(t, np.exp(log_v)), (0.5, 7.5))
        assert k.found
        assert k.time == pytest.approx(tau, abs=3 * max(k.time_err, 0.1))

    def test_too_few_points(self):
        t = np.linspace(0.0, 1.0, 8)
        with pytest.raises(ValueError):
            detect_kink(make_series(t, np.exp(t)), (0.0, 1.0))


class TestFitWindows:
    def test_windows_from_time_scales(self):
        p = DimerParams(theta=1.35, n_particles=1000)
        ts = time_scales(p, 1.0)
        (a_lo, a_hi), (b_lo, b_hi) = fit_windows(ts)
        pad = 0.5 / ts.lambda_s
        assert a_lo == pytest.approx(ts.tau_s + pad)
        assert a_hi == pytest.approx(ts.tau_L - pad)
        assert b_lo == pytest.approx(ts.tau_L + pad)
        assert b_hi == pytest.approx(ts.tau_E - pad)


class TestThetaScan:
    def test_stable_cell_flagged(self):
        rows = theta_scan([0.5], [100])
        assert len(rows) == 1
        assert rows[0].error is not None
        assert rows[0].lambda_s_classical == 0.0

    def test_slow_rate_cell_flagged(self):
        rows = theta_scan([np.arctan(2.0) + 1e-4], [1000])
        assert rows[0].slow_rate
        assert rows[0].fit_2ls_window is None

    def test_small_scan_produces_fits(self):
        rows = theta_scan([1.30, 1.35], [200], n_time_points=200)
        assert len(rows) == 2
        for row in rows:
            assert row.error is None
            assert row.fit_2ls_window is not None
            # Fitted double-rate slope is within 35% of 2 lambda_s even at
            # this small N (agreement tightens with N; see the scan tests).
            assert abs(row.fit_2ls_window.slope / (2 * row.lambda_s_classical)
                       - 1.0) < 0.35

    def test_deterministic_ordering(self):
        rows = theta_scan([1.35, 1.30], [200, 100], n_time_points=120)
        keys = [(r.theta, r.n_particles) for r in rows]
        assert keys == sorted(keys)


class TestScanCsv:
    def test_byte_determinism(self):
        rows1 = theta_scan([1.32, 1.38], [150], n_time_points=150)
        rows2 = theta_scan([1.38, 1.32], [150], n_time_points=150)
        assert scan_to_csv(rows1) == scan_to_csv(rows2)

    def test_header_and_shape(self):
        csv = scan_to_csv(theta_scan([0.5], [10]))
        lines = csv.splitlines()
        assert lines[0] == \
            "theta,N,lambda_s,slope_2w,stderr_2w,slope_1w,stderr_1w,kink_t,kink_err"
        assert len(lines) == 2
        assert lines[1].split(",")[1] == "10"
