import math

import numpy as np
import pytest

from bsv_sidebands import model, scan


def params(r=0.5, a1=1.0, a2=1.0, gt=0.1):
    return model.ModelParams.from_values(r=r, amp1=a1, amp2=a2, gamma_t=gt)


BRIGHT = model.ModelParams.from_values(
    r=math.asinh(math.sqrt(1e11)), gamma_t=math.pi / 4e5
)


class TestClassify:
    def test_examples(self):
        assert scan.classify_state(1.0, 1.0) is scan.StateLabel.MINIMUM_UNCERTAINTY
        assert scan.classify_state(1.0147, 1.0) is scan.StateLabel.SQUASHED
        assert scan.classify_state(0.0122, 82.0) is scan.StateLabel.SQUEEZED
        assert scan.classify_state(1.5, 1.5) is scan.StateLabel.EXCESS_BOTH

    def test_partition_is_total(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            vx = rng.uniform(0.5, 2.0)
            vp = rng.uniform(0.5, 2.0)
            assert scan.classify_state(vx, vp) in scan.StateLabel

    def test_positive_variances_required(self):
        with pytest.raises(ValueError):
            scan.classify_state(0.0, 1.0)


class TestPhaseMap:
    def test_single_point_equals_observables(self):
        p = params()
        grid = scan.phase_map(p, [0.0], [0.0])
        obs = model.observables(p)
        assert grid.plane_n[0, 0] == obs.mean_n
        assert grid.plane_var_x[0, 0] == obs.var_x
        assert grid.plane_var_p[0, 0] == obs.var_p
        assert grid.plane_n[0, 0] == pytest.approx(0.01 * math.exp(-1.0), rel=1e-12)
        assert grid.plane_var_x[0, 0] == pytest.approx(1.0 + 0.04 * math.exp(-1.0), rel=1e-12)
        assert grid.plane_var_p[0, 0] == pytest.approx(1.0, abs=1e-14)

    def test_grid_matches_pointwise_calls(self):
        # same evaluation path, no interpolation; the only play left is the
        # last-ulp difference between numpy's vectorised and scalar
        # transcendental kernels
        p = params(r=0.8, gt=0.3)
        phi_axis = np.linspace(-2.0, 2.0, 7)
        dt_axis = np.linspace(-1.0, 3.0, 5)
        grid = scan.phase_map(p, phi_axis, dt_axis)
        for i, dt in enumerate(dt_axis):
            for j, phi in enumerate(phi_axis):
                point = model.ModelParams.from_values(
                    r=0.8, phi=phi, theta1=dt, theta2=0.0, gamma_t=0.3
                )
                obs = model.observables(point)
                assert grid.plane_n[i, j] == pytest.approx(obs.mean_n, rel=1e-13, abs=1e-300)
                assert grid.plane_var_x[i, j] == pytest.approx(obs.var_x, rel=1e-13)
                assert grid.plane_var_p[i, j] == pytest.approx(obs.var_p, rel=1e-13)

    def test_plane_shapes(self):
        grid = scan.phase_map(params(), np.linspace(-1, 1, 11), np.linspace(-2, 2, 5))
        assert grid.plane_n.shape == (5, 11)
        assert grid.plane_n.min() >= 0.0
        assert grid.plane_var_x.min() > 0.0

    def test_anti_diagonal_constancy(self):
        # only phi + dtheta enters <n>: equal-spacing axes make anti-diagonals constant
        axis = np.linspace(-math.pi, math.pi, 41)
        grid = scan.phase_map(params(), axis, axis)
        for k in range(1, 6):
            lhs = grid.plane_n[10 + k, 20 - k]
            rhs = grid.plane_n[10, 20]
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-15)

    def test_phi_periodicity_on_edges(self):
        axis = np.linspace(-math.pi, math.pi, 21)
        grid = scan.phase_map(params(), axis, axis)
        assert np.allclose(grid.plane_n[:, 0], grid.plane_n[:, -1], rtol=1e-9, atol=1e-15)

    def test_heisenberg_everywhere(self):
        axis = np.linspace(-math.pi, math.pi, 61)
        for base in (params(), BRIGHT):
            grid = scan.phase_map(base, axis, axis)
            assert grid.heisenberg_ok(1e-9)

    def test_bad_axes_rejected(self):
        with pytest.raises(ValueError):
            scan.phase_map(params(), [], [0.0])
        with pytest.raises(ValueError):
            scan.phase_map(params(), [0.0, -1.0], [0.0])


class TestLineCut:
    def test_squashed_row(self):
        axis = np.linspace(-math.pi, math.pi, 201)
        grid = scan.phase_map(params(), axis, axis)
        cut = scan.line_cut(grid, 0.0)
        assert np.abs(cut.var_p - 1.0).max() < 1e-12
        assert set(cut.labels()) <= {"squashed", "minimum-uncertainty"}

    def test_mixed_row_modulates_both(self):
        axis = np.linspace(-math.pi, math.pi, 201)
        grid = scan.phase_map(params(), axis, axis)
        cut = scan.line_cut(grid, math.pi / 2.0)
        assert cut.var_x.std() > 1e-4 and cut.var_p.std() > 1e-4

    def test_heisenberg_along_rows(self):
        axis = np.linspace(-math.pi, math.pi, 101)
        grid = scan.phase_map(params(), axis, axis)
        for dt in (-2.0, 0.0, 1.0):
            cut = scan.line_cut(grid, dt)
            assert (cut.var_x * cut.var_p).min() >= 1.0 - 1e-9

    def test_out_of_range_rejected(self):
        grid = scan.phase_map(params(), [0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            scan.line_cut(grid, 5.0)


class TestSqueezingCase:
    def test_full_conversion_series(self):
        phi = np.linspace(-math.pi, math.pi, 201)
        series = scan.squeezing_case(phi)
        e2r = (math.sqrt(21.0) - math.sqrt(20.0)) ** 2
        assert np.abs(series.mean_n - 20.0).max() < 1e-9
        assert np.abs(series.var_min - e2r).max() < 1e-9
        assert np.abs(series.var_min * series.var_max - 1.0).max() < 1e-9

    def test_phi_zero_squeezes_fixed_quadrature(self):
        series = scan.squeezing_case(np.array([0.0]))
        e2r = (math.sqrt(21.0) - math.sqrt(20.0)) ** 2
        assert series.var_x[0] == pytest.approx(e2r, abs=1e-9)
        assert scan.classify_state(series.var_x[0], series.var_p[0]) is scan.StateLabel.SQUEEZED

    def test_ellipse_rotates_with_phi(self):
        # fixed quadratures trade places between phi = 0 and phi = pi while
        # the principal pair stays put
        series = scan.squeezing_case(np.array([0.0, math.pi / 2.0, math.pi]))
        assert series.var_x[0] < 1.0 < series.var_p[0]
        assert series.var_p[2] < 1.0 < series.var_x[2]
        assert series.var_x[1] == pytest.approx(series.var_p[1], rel=1e-9)
        assert np.allclose(series.var_min, series.var_min[0], rtol=1e-12)


class TestExports:
    def test_map_files(self, tmp_path):
        axis = np.linspace(-1.0, 1.0, 9)
        grid = scan.phase_map(params(), axis, axis)
        written = scan.write_map_csv(grid, tmp_path)
        names = {p.name for p in written}
        assert names == {"plane_n.csv", "plane_var_x.csv", "plane_var_p.csv", "axes.csv"}
        plane = np.loadtxt(tmp_path / "plane_n.csv", delimiter=",")
        assert np.array_equal(plane, grid.plane_n)

    def test_cut_file(self, tmp_path):
        axis = np.linspace(-1.0, 1.0, 9)
        grid = scan.phase_map(params(), axis, axis)
        cut = scan.line_cut(grid, 0.0)
        path = tmp_path / "cut.csv"
        scan.write_cut_csv(cut, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "phi,n,var_x,var_p,label"
        assert len(lines) == 10
