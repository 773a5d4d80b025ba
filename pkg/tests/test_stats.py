import math

import numpy as np
import pytest

from bsv_sidebands import stats


class TestSingleDetectorG2:
    def test_constant_series(self):
        series = stats.ShotSeries(values=np.full(100, 4.0))
        assert stats.g2_single_detector(series) == pytest.approx(1.0 - 0.25, rel=1e-14)

    def test_zero_mean_rejected(self):
        with pytest.raises(ValueError):
            stats.g2_single_detector(stats.ShotSeries(values=np.zeros(10)))

    def test_poisson_calibration(self):
        series = stats.sample_poisson(50.0, 100_000, seed=101)
        _, pooled = stats.block_g2(series, 20)
        assert abs(pooled.value - 1.0) <= 3.0 * pooled.stderr

    def test_thermal_calibration(self):
        series = stats.sample_thermal(20.0, 100_000, seed=102)
        _, pooled = stats.block_g2(series, 20)
        assert abs(pooled.value - 2.0) <= 3.0 * pooled.stderr


class TestBlockG2:
    def test_poisson_blocks(self):
        series = stats.sample_poisson(30.0, 20_000, seed=7)
        blocks, pooled = stats.block_g2(series, 20)
        assert blocks.size == 20 and not np.isnan(blocks).any()
        assert pooled.n_blocks == 20 and pooled.n_shots == 20_000
        assert abs(pooled.value - 1.0) <= 4.0 * pooled.stderr

    def test_single_block_rejected(self):
        series = stats.sample_poisson(5.0, 100, seed=1)
        with pytest.raises(ValueError):
            stats.block_g2(series, 1)

    def test_constant_series_zero_stderr(self):
        series = stats.ShotSeries(values=np.full(40, 7.0))
        blocks, pooled = stats.block_g2(series, 4)
        assert np.allclose(blocks, blocks[0])
        assert pooled.stderr == 0.0

    def test_remainder_dropped_from_tail(self):
        values = np.concatenate([np.full(45, 2.0), [1000.0]])
        _, pooled = stats.block_g2(stats.ShotSeries(values=values), 5)
        # 46 // 5 = 9 shots per block; the huge tail shot falls outside
        assert pooled.n_shots == 45
        assert pooled.value == pytest.approx(1.0 - 0.5, rel=1e-12)

    def test_zero_mean_block_reported_missing(self):
        values = np.concatenate([np.zeros(50), np.full(150, 3.0)])
        blocks, pooled = stats.block_g2(stats.ShotSeries(values=values), 4)
        assert np.isnan(blocks[0])
        assert pooled.n_blocks == 3
        assert pooled.n_shots == 150


class TestSqueezedSampler:
    def test_counts_always_even(self):
        series = stats.sample_squeezed_vacuum_counts(0.9, 1, 20_000, seed=3)
        assert np.all(series.values % 2 == 0)

    def test_single_mode_g2(self):
        r = math.asinh(math.sqrt(5.0))
        series = stats.sample_squeezed_vacuum_counts(r, 1, 1_000_000, seed=44)
        _, pooled = stats.block_g2(series, 20)
        assert abs(pooled.value - 3.2) <= 3.0 * pooled.stderr

    def test_two_mode_g2(self):
        r = math.asinh(math.sqrt(10.0))
        series = stats.sample_squeezed_vacuum_counts(r, 2, 1_000_000, seed=45)
        _, pooled = stats.block_g2(series, 20)
        want = 1.0 + (2.0 + 1.0 / 10.0) / 2.0  # variance additivity over modes
        assert abs(pooled.value - want) <= 3.0 * pooled.stderr

    def test_mean_matches_sinh_sq(self):
        r = 0.8
        series = stats.sample_squeezed_vacuum_counts(r, 1, 400_000, seed=46)
        want = math.sinh(r) ** 2
        stderr = series.values.std() / math.sqrt(series.values.size)
        assert abs(series.values.mean() - want) <= 4.0 * stderr

    def test_g2_decreases_with_mode_count(self):
        r = math.asinh(math.sqrt(5.0))
        values = []
        for k in (1, 2, 4, 8, 16):
            series = stats.sample_squeezed_vacuum_counts(r, k, 300_000, seed=50 + k)
            values.append(stats.g2_single_detector(series))
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            stats.sample_squeezed_vacuum_counts(0.0, 1, 100, seed=1)
        with pytest.raises(ValueError):
            stats.sample_squeezed_vacuum_counts(1.0, 0, 100, seed=1)


class TestBrightLimit:
    def test_gamma_matches_discrete_sampler(self):
        # high-gain single mode: exact even-count sampler vs Gamma limit
        r = math.asinh(20.0)  # <n> = 400
        exact = stats.sample_squeezed_vacuum_counts(r, 1, 300_000, seed=60)
        gamma = stats.sample_bright_sv_energy(400.0, 1.0, 300_000, seed=61)
        _, pe = stats.block_g2(exact, 20)
        _, pg = stats.block_g2(gamma, 20)
        joint = math.hypot(pe.stderr, pg.stderr)
        assert abs(pe.value - pg.value) <= 3.0 * joint

    def test_fractional_modes(self):
        series = stats.sample_bright_sv_energy(1e10, 1.6, 400_000, seed=62)
        _, pooled = stats.block_g2(series, 20)
        assert abs(pooled.value - (1.0 + 2.0 / 1.6)) <= 3.0 * pooled.stderr


class TestEffectiveModeCount:
    def test_single_mode_bright_limit(self):
        assert stats.effective_mode_count(3.0) == pytest.approx(1.0, rel=1e-14)

    def test_bsv_regime(self):
        assert stats.effective_mode_count(2.24) == pytest.approx(2.0 / 1.24, rel=1e-12)

    def test_round_trip(self):
        for k in range(1, 11):
            g2 = 1.0 + 2.0 / k
            assert stats.effective_mode_count(g2) == pytest.approx(k, rel=1e-12)

    def test_finite_brightness_correction(self):
        g2 = 1.0 + (2.0 + 1.0 / 10.0) / 4.0
        assert stats.effective_mode_count(g2, n_per_mode=10.0) == pytest.approx(4.0)

    def test_subpoissonian_rejected(self):
        with pytest.raises(ValueError):
            stats.effective_mode_count(1.0)


class TestDeterminism:
    def test_same_seed_bitwise_identical(self):
        for sampler in (
            lambda s: stats.sample_poisson(12.0, 5000, s),
            lambda s: stats.sample_thermal(8.0, 5000, s),
            lambda s: stats.sample_squeezed_vacuum_counts(0.9, 2, 5000, s),
            lambda s: stats.sample_bright_sv_energy(1e8, 1.6, 5000, s),
        ):
            a, b = sampler(99), sampler(99)
            assert np.array_equal(a.values, b.values)

    def test_different_seeds_differ(self):
        a = stats.sample_poisson(12.0, 5000, 1)
        b = stats.sample_poisson(12.0, 5000, 2)
        assert not np.array_equal(a.values, b.values)

    def test_spawned_seeds_stable(self):
        a = [s.generate_state(2).tolist() for s in stats.spawn_seeds(7, 3)]
        b = [s.generate_state(2).tolist() for s in stats.spawn_seeds(7, 3)]
        assert a == b


class TestHistogram:
    def test_constant_series_single_bin(self):
        edges, counts = stats.histogram(stats.ShotSeries(values=np.full(50, 3.0)), 10)
        assert counts.sum() == 50
        assert (counts > 0).sum() == 1

    def test_total_counts_preserved(self):
        series = stats.sample_thermal(20.0, 40_000, seed=8)
        edges, counts = stats.histogram(series, 64)
        assert counts.sum() == len(series)
        assert edges.size == counts.size + 1

    def test_width_mode_covers_all(self):
        series = stats.sample_poisson(30.0, 10_000, seed=9)
        edges, counts = stats.histogram(series, 2.5)
        assert counts.sum() == len(series)
        assert edges[0] <= series.values.min() < edges[1] or edges[0] <= series.values.min()
        assert edges[-1] > series.values.max()

    def test_thermal_tail_is_heavy(self):
        series = stats.sample_thermal(20.0, 100_000, seed=10)
        assert np.count_nonzero(series.values > 100.0) > 0

    def test_poisson_tail_is_light(self):
        series = stats.sample_poisson(100.0, 10_000, seed=11)
        assert series.values.max() < 200.0

    def test_csv_export(self, tmp_path):
        series = stats.sample_poisson(5.0, 1000, seed=12)
        edges, counts = stats.histogram(series, 8)
        path = tmp_path / "hist.csv"
        stats.histogram_to_csv(edges, counts, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "bin_left,bin_right,count"
        assert len(rows) == counts.size + 1


class TestShotSeries:
    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            stats.ShotSeries(values=np.array([1.0]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            stats.ShotSeries(values=np.array([1.0, -2.0]))
