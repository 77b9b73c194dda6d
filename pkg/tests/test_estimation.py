import math

import numpy as np
import pytest

from qiup.errors import DataFormatError, QiupWarning, SparseScanError
from qiup.estimation import (
    CalibrationRecord,
    FitResult,
    NoisyScan,
    calibrate,
    fit,
    format_counts_csv,
    infer_alpha1,
    read_counts_csv,
    simulate_measurement,
)
from qiup.observables import CountResult, FringeScan
from qiup.reference import nh_closed, nv_closed

TWO_PI = 2.0 * math.pi


def oracle_scan(beta1: float, gamma: float, points: int = 64) -> FringeScan:
    """Noiseless fringe data generated straight from the closed forms."""
    phis = np.linspace(0.0, TWO_PI, points, endpoint=False)
    records = tuple(
        CountResult(float(nh_closed(beta1, gamma, p)), float(nv_closed(beta1, gamma, p)))
        for p in phis
    )
    return FringeScan(tuple(float(p) for p in phis), records, "o'")


def circular_distance(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


class TestSimulateMeasurement:
    def test_deterministic_for_fixed_seed(self):
        scan = oracle_scan(0.8, 0.5)
        a = simulate_measurement(scan, shots=1000, seed=42)
        b = simulate_measurement(scan, shots=1000, seed=42)
        assert a == b

    def test_different_seeds_differ(self):
        scan = oracle_scan(0.8, 0.5)
        a = simulate_measurement(scan, shots=1000, seed=1)
        b = simulate_measurement(scan, shots=1000, seed=2)
        assert a.counts_v != b.counts_v

    def test_zero_expectation_gives_zero_counts(self):
        scan = FringeScan(
            (0.0, 1.0), (CountResult(0.0, 0.0), CountResult(0.0, 0.0)), "o'"
        )
        noisy = simulate_measurement(scan, shots=10_000, seed=3)
        assert noisy.counts_h == (0, 0)
        assert noisy.counts_v == (0, 0)

    def test_poisson_concentration(self):
        # constant expectation 0.5625; the grid-averaged rate is within 3 sigma
        scan = FringeScan(
            tuple(np.linspace(0, TWO_PI, 64, endpoint=False)),
            tuple(CountResult(0.125, 0.5625) for _ in range(64)),
            "o'",
        )
        shots = 1_000_000
        noisy = simulate_measurement(scan, shots=shots, seed=7)
        mean_rate = np.mean(np.asarray(noisy.counts_v) / shots)
        sigma = math.sqrt(0.5625 / (shots * 64))
        assert abs(mean_rate - 0.5625) < 3 * sigma

    def test_shots_validated(self):
        with pytest.raises(ValueError):
            simulate_measurement(oracle_scan(0.5, 0.0), shots=0, seed=1)


class TestNoisyScan:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            NoisyScan((0.0, 1.0), (1,), (1, 2), shots=10, seed=0)

    def test_shots_positive(self):
        with pytest.raises(ValueError):
            NoisyScan((0.0,), (1,), (1,), shots=0, seed=0)


class TestCalibrate:
    def test_noiseless_reference(self):
        record = calibrate(oracle_scan(1.0, 0.0))
        assert record.phi_at_max_v == pytest.approx(0.0, abs=1e-15)
        assert record.visibility == pytest.approx(0.8, abs=1e-3)

    def test_sparse_scan_rejected(self):
        with pytest.raises(SparseScanError, match="E_SPARSE_SCAN"):
            calibrate(oracle_scan(1.0, 0.0, points=15))

    def test_flat_fringe_warns(self):
        with pytest.warns(QiupWarning):
            record = calibrate(oracle_scan(0.0, 0.0))
        assert record.visibility == pytest.approx(0.0, abs=1e-12)

    def test_noisy_max_within_one_grid_step(self):
        scan = oracle_scan(1.0, 0.0)
        step = TWO_PI / 64
        hits = 0
        for seed in range(20):
            noisy = simulate_measurement(scan, shots=100_000, seed=seed)
            record = calibrate(noisy)
            if circular_distance(record.phi_at_max_v, 0.0) <= step + 1e-12:
                hits += 1
        assert hits >= 18

    def test_record_invariant(self):
        with pytest.raises(ValueError):
            CalibrationRecord(0.0, v_max=0.1, v_min=0.2)


class TestFit:
    def test_noiseless_recovery(self):
        result = fit(oracle_scan(0.6, 1.0))
        assert result.converged
        assert abs(result.beta1_hat - 0.6) < 1e-6
        assert circular_distance(result.gamma_hat, 1.0) < 1e-6
        assert result.residual_sum_sq < 1e-18
        assert result.alpha1_hat == pytest.approx(0.8, abs=1e-6)

    def test_noiseless_recovery_near_gamma_wrap(self):
        result = fit(oracle_scan(0.8, 6.2))
        assert circular_distance(result.gamma_hat, 6.2) < 1e-6

    def test_beta1_zero_flags_gamma(self):
        result = fit(oracle_scan(0.0, 1.234))
        assert result.converged
        assert result.beta1_hat < 1e-6
        assert result.gamma_unidentifiable

    def test_identifiable_case_not_flagged(self):
        assert not fit(oracle_scan(0.5, 0.7)).gamma_unidentifiable

    def test_poisson_recovery_single_seed(self):
        noisy = simulate_measurement(oracle_scan(0.8, 0.5), shots=100_000, seed=5)
        result = fit(noisy)
        assert result.converged
        assert abs(result.beta1_hat - 0.8) < 0.02
        assert circular_distance(result.gamma_hat, 0.5) < 0.05

    def test_inverse_variance_weighting(self):
        noisy = simulate_measurement(oracle_scan(0.8, 0.5), shots=100_000, seed=9)
        result = fit(noisy, weighting="inverse_variance")
        assert abs(result.beta1_hat - 0.8) < 0.02

    def test_inverse_variance_needs_counts(self):
        with pytest.raises(ValueError):
            fit(oracle_scan(0.5, 0.5), weighting="inverse_variance")

    def test_unknown_weighting(self):
        with pytest.raises(ValueError):
            fit(oracle_scan(0.5, 0.5), weighting="magic")

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            fit(FringeScan((), (), "o'"))

    def test_non_finite_rejected(self):
        scan = FringeScan(
            (0.0, 1.0), (CountResult(0.1, math.inf), CountResult(0.1, 0.2)), "o'"
        )
        with pytest.raises(ValueError):
            fit(scan)

    def test_estimator_bias_bounded(self):
        # spec-level invariant: mean recovered beta1 over 100 seeds stays
        # within 3 standard errors of the truth at shots = 1e5
        scan = oracle_scan(0.8, 0.5)
        estimates = [
            fit(simulate_measurement(scan, shots=100_000, seed=seed)).beta1_hat
            for seed in range(100)
        ]
        mean = float(np.mean(estimates))
        sem = float(np.std(estimates, ddof=1)) / math.sqrt(len(estimates))
        assert abs(mean - 0.8) <= 3 * sem

    def test_summary_format(self):
        result = FitResult(0.6, 1.0, 0.8, 1e-20, True)
        line = result.summary()
        assert line.startswith("beta1=0.6 ")
        assert "converged=true" in line


class TestInferAlpha1:
    @pytest.mark.parametrize("beta1,expected", [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)])
    def test_values(self, beta1, expected):
        assert infer_alpha1(beta1) == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            infer_alpha1(1.2)
        with pytest.raises(ValueError):
            infer_alpha1(-0.1)


class TestMeasurementCsv:
    def test_noisy_roundtrip(self):
        noisy = simulate_measurement(oracle_scan(0.7, 0.3), shots=5000, seed=11)
        back = read_counts_csv(format_counts_csv(noisy))
        assert isinstance(back, NoisyScan)
        assert back.counts_h == noisy.counts_h
        assert back.counts_v == noisy.counts_v
        assert back.shots == noisy.shots
        np.testing.assert_allclose(back.phis, noisy.phis, rtol=1e-15)

    def test_noiseless_roundtrip_yields_fringe_scan(self):
        scan = oracle_scan(0.6, 1.0)
        back = read_counts_csv(format_counts_csv(scan, shots=1))
        assert isinstance(back, FringeScan)
        np.testing.assert_allclose(back.column("v"), scan.column("v"), rtol=1e-12)

    @pytest.mark.parametrize(
        "text,match",
        [
            ("phi,counts_h,counts_v\n0,1,2\n", "shots"),
            ("# shots=10\nwrong,header\n0,1,2\n", "header"),
            ("# shots=10\nphi,counts_h,counts_v\n0,1\n", "3 comma-separated"),
            ("# shots=10\nphi,counts_h,counts_v\n0,x,2\n", "malformed number"),
            ("# shots=10\nphi,counts_h,counts_v\n0,inf,2\n", "non-finite"),
            ("# shots=oops\nphi,counts_h,counts_v\n0,1,2\n", "shots"),
            ("", "no data"),
        ],
    )
    def test_malformed_inputs(self, text, match):
        with pytest.raises(DataFormatError, match=match):
            read_counts_csv(text)

    def test_error_carries_line_number(self):
        try:
            read_counts_csv("# shots=10\nphi,counts_h,counts_v\n0,1,2\n1,zz,3\n")
        except DataFormatError as err:
            assert err.line == 4
        else:
            pytest.fail("expected DataFormatError")
