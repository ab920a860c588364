import math

import numpy as np
import pytest

from pnlsep.errors import DataError, DegenerateChannelError
from pnlsep.signals import (
    LaggedCovariance,
    SignalMatrix,
    lagged_covariance,
    least_squares_gain,
    match_and_score,
    scale_correct,
    sir,
    symmetrize,
)


class TestSignalMatrix:
    def test_rejects_nan(self):
        with pytest.raises(DataError, match="non-finite"):
            SignalMatrix([[1.0, float("nan")]])

    def test_rejects_single_sample(self):
        with pytest.raises(DataError, match="two samples"):
            SignalMatrix([[1.0], [2.0]])

    def test_data_is_read_only(self):
        sm = SignalMatrix([[1.0, 2.0]])
        with pytest.raises(ValueError):
            sm.data[0, 0] = 3.0

    def test_label_count_must_match(self):
        with pytest.raises(DataError, match="labels"):
            SignalMatrix([[1.0, 2.0]], labels=("a", "b"))


class TestLaggedCovariance:
    def test_zero_signal(self):
        cov = lagged_covariance(SignalMatrix([[0.0, 0.0, 0.0]]), 1)
        assert cov.matrix.shape == (1, 1)
        assert cov.matrix[0, 0] == 0.0

    def test_alternating_signal_lag1(self):
        # mean 0; three products of adjacent samples, each -1; divide by 3
        cov = lagged_covariance(SignalMatrix([[1.0, -1.0, 1.0, -1.0]]), 1)
        assert cov.matrix[0, 0] == pytest.approx(-1.0)

    def test_alternating_signal_lag0(self):
        cov = lagged_covariance(SignalMatrix([[1.0, -1.0, 1.0, -1.0]]), 0)
        assert cov.matrix[0, 0] == pytest.approx(1.0)

    def test_lag_out_of_range(self):
        sm = SignalMatrix([[1.0, 2.0, 3.0]])
        with pytest.raises(DataError, match="lag"):
            lagged_covariance(sm, 2)
        with pytest.raises(DataError, match="lag"):
            lagged_covariance(sm, -1)

    def test_zero_lag_symmetrized_is_psd(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            sm = SignalMatrix(rng.normal(size=(4, 60)))
            c = symmetrize(lagged_covariance(sm, 0)).matrix
            assert np.linalg.eigvalsh(c).min() >= -1e-10

    def test_bilinear_in_channel_scaling(self):
        rng = np.random.default_rng(12)
        data = rng.normal(size=(3, 50))
        base = lagged_covariance(SignalMatrix(data), 2).matrix
        alpha = 2.5
        scaled = data.copy()
        scaled[1] *= alpha
        got = lagged_covariance(SignalMatrix(scaled), 2).matrix
        expected = base.copy()
        expected[1, :] *= alpha
        expected[:, 1] *= alpha
        expected[1, 1] = base[1, 1] * alpha * alpha
        np.testing.assert_allclose(got, expected, rtol=1e-12)


class TestSymmetrize:
    def test_definition(self):
        cov = symmetrize(LaggedCovariance(matrix=[[1.0, 2.0], [0.0, 1.0]], lag=0))
        np.testing.assert_array_equal(cov.matrix, [[1.0, 1.0], [1.0, 1.0]])
        assert cov.lag == 0

    def test_symmetric_fixed_point(self):
        cov = LaggedCovariance(matrix=[[2.0, 0.5], [0.5, 1.0]], lag=1)
        np.testing.assert_array_equal(symmetrize(cov).matrix, cov.matrix)

    def test_antisymmetric_vanishes(self):
        cov = LaggedCovariance(matrix=[[0.0, 4.0], [-4.0, 0.0]], lag=0)
        np.testing.assert_array_equal(symmetrize(cov).matrix, np.zeros((2, 2)))


class TestScaleCorrect:
    def test_pure_rescaling(self):
        s = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(scale_correct(2.0 * s, s), s)
        assert least_squares_gain(2.0 * s, s) == pytest.approx(0.5)

    def test_sign_flip_absorbed(self):
        s = np.array([1.0, -2.0, 3.0])
        np.testing.assert_allclose(scale_correct(-s, s), s)

    def test_closed_form(self):
        # <s,y>=6, <y,y>=3 -> gain 2
        out = scale_correct(np.array([1.0, 1.0, 1.0]), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(out, [2.0, 2.0, 2.0])

    def test_zero_channel_rejected(self):
        with pytest.raises(DegenerateChannelError):
            scale_correct(np.zeros(3), np.ones(3))

    def test_minimizes_over_gain_grid(self):
        rng = np.random.default_rng(21)
        s = rng.normal(size=40)
        y = rng.normal(size=40)
        best = float(np.mean((s - scale_correct(y, s)) ** 2))
        for gain in np.linspace(-3.0, 3.0, 601):
            assert best <= np.mean((s - gain * y) ** 2) + 1e-12


class TestSir:
    def test_perfect_recovery(self):
        s = np.array([1.0, 2.0])
        assert sir(s, s) == math.inf

    def test_direct_arithmetic(self):
        assert sir(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(
            10.0 * math.log10(0.5)
        )

    def test_null_estimate(self):
        s = np.array([1.0, -1.0, 2.0])
        assert sir(s, np.zeros(3)) == pytest.approx(0.0)

    def test_zero_reference_rejected(self):
        with pytest.raises(DegenerateChannelError):
            sir(np.zeros(4), np.ones(4))

    def test_invariant_under_common_scaling(self):
        rng = np.random.default_rng(31)
        s = rng.normal(size=30)
        y = rng.normal(size=30)
        base = sir(s, y)
        for c in (0.1, -2.0, 1e3):
            assert sir(c * s, c * y) == pytest.approx(base, rel=1e-12)


class TestMatchAndScore:
    def test_row_swap(self):
        rng = np.random.default_rng(41)
        s = SignalMatrix(rng.normal(size=(2, 20)))
        y = SignalMatrix(s.data[::-1])
        report = match_and_score(y, s)
        assert report.permutation == (1, 0)
        assert all(v == math.inf for v in report.per_source_db)
        assert report.average_db == math.inf

    def test_identity(self):
        rng = np.random.default_rng(42)
        s = SignalMatrix(rng.normal(size=(3, 15)))
        report = match_and_score(s, s)
        assert report.permutation == (0, 1, 2)
        assert report.average_db == math.inf

    def test_swapped_and_scaled(self):
        rng = np.random.default_rng(43)
        s = SignalMatrix(rng.normal(size=(2, 25)))
        y = SignalMatrix(np.vstack([2.0 * s.data[1], -s.data[0]]))
        report = match_and_score(y, s)
        assert report.permutation == (1, 0)
        assert report.gains[0] == pytest.approx(-1.0)
        assert report.gains[1] == pytest.approx(0.5)
        assert all(v == math.inf for v in report.per_source_db)

    def test_beats_identity_permutation(self):
        rng = np.random.default_rng(44)
        s = SignalMatrix(rng.normal(size=(3, 40)))
        noisy = rng.permutation(s.data) + 0.3 * rng.normal(size=(3, 40))
        y = SignalMatrix(noisy)
        report = match_and_score(y, s)
        identity_avg = np.mean(
            [
                sir(s.data[i], scale_correct(y.data[i], s.data[i]))
                for i in range(3)
            ]
        )
        assert report.average_db >= identity_avg - 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            match_and_score(
                SignalMatrix(np.ones((2, 5)) + np.eye(2, 5)),
                SignalMatrix(np.ones((3, 5)) + np.eye(3, 5)),
            )

    def test_channel_cap(self):
        data = np.random.default_rng(45).normal(size=(7, 10))
        sm = SignalMatrix(data)
        with pytest.raises(DataError, match="at most"):
            match_and_score(sm, sm)
