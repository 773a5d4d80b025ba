import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsv_sidebands import model


def params(r=0.0, phi=0.0, a1=1.0, t1=0.0, a2=1.0, t2=0.0, gt=0.1):
    return model.ModelParams.from_values(
        r=r, phi=phi, amp1=a1, theta1=t1, amp2=a2, theta2=t2, gamma_t=gt
    )


YELLOW = params(r=math.asinh(math.sqrt(20.0)), a2=0.0, gt=math.pi / 2.0)


class TestValidation:
    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            model.SqueezeParams(r=-0.1)

    def test_negative_amp_rejected(self):
        with pytest.raises(ValueError):
            model.HarmonicField(amp=-1.0)

    def test_nonpositive_gamma_t_rejected(self):
        with pytest.raises(ValueError):
            params(gt=0.0)

    def test_phi_canonical_interval(self):
        for phi in (-9.0, -math.pi, 0.0, math.pi, 7.5, 100.0):
            stored = model.SqueezeParams(r=1.0, phi=phi).phi
            assert -math.pi < stored <= math.pi


class TestCouplings:
    def test_degenerate_zero_n(self):
        cs = model.derive_couplings(params(gt=0.1))
        assert cs.g == pytest.approx(0.1, abs=0) and cs.f == pytest.approx(0.1, abs=0)
        assert cs.n_sq == 0.0
        assert cs.cosh_n == 1.0 and cs.sinhc_n == 1.0 and cs.m_sq == 1.0

    def test_trigonometric_branch(self):
        # cosh(ix) = cos(x): beam-splitter-dominant channel
        cs = model.derive_couplings(params(a2=0.0, gt=math.pi / 2.0))
        assert cs.g == pytest.approx(math.pi / 2.0)
        assert cs.f == 0.0
        assert cs.n_sq == pytest.approx(-((math.pi / 2.0) ** 2))
        assert abs(cs.cosh_n) < 1e-12  # cos(pi/2)
        assert cs.m_sq == pytest.approx(4.0 / math.pi**2, rel=1e-14)

    def test_plain_arithmetic_branch(self):
        cs = model.derive_couplings(params(a1=0.5, a2=1.0, gt=0.3))
        assert cs.n_sq == pytest.approx(0.09 * (1.0 - 0.25), rel=1e-14)
        assert cs.cosh_n == pytest.approx(math.cosh(math.sqrt(0.0675)), rel=1e-14)

    def test_m_sq_nonnegative_everywhere(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            cs = model.derive_couplings(
                params(
                    a1=rng.uniform(0, 2),
                    a2=rng.uniform(0, 2),
                    gt=rng.uniform(0.01, 2),
                )
            )
            assert cs.m_sq >= 0.0

    def test_series_window_continuity(self):
        lo = model.hyperbolic_factors(9.999e-13)
        hi = model.hyperbolic_factors(1.0001e-12)
        assert float(lo[0]) == pytest.approx(float(hi[0]), rel=1e-12)
        assert float(lo[1]) == pytest.approx(float(hi[1]), rel=1e-12)


class TestMeanPhotons:
    def test_vacuum_beam_splitter_only(self):
        assert model.sideband_mean_photons(params(r=0.0, a2=0.0)) == 0.0

    def test_balanced_squashed_point(self):
        # f = g = 0.1 real, phi = 0, r = 0.5: <n> = (f cosh r - g sinh r)^2
        value = model.sideband_mean_photons(params(r=0.5, gt=0.1))
        assert value == pytest.approx(0.01 * math.exp(-1.0), rel=1e-12)

    def test_full_conversion(self):
        assert model.sideband_mean_photons(YELLOW) == pytest.approx(20.0, rel=1e-12)


class TestMoments:
    def test_vacuum_zero(self):
        a2, a2c, n = model.sideband_moments(params(r=0.0, a2=0.0))
        assert a2 == 0 and a2c == 0 and n == 0

    def test_balanced_point_real(self):
        a2, _, _ = model.sideband_moments(params(r=0.5, gt=0.1))
        assert a2.imag == pytest.approx(0.0, abs=1e-15)
        assert a2.real == pytest.approx(0.01 * math.exp(-1.0), rel=1e-12)

    def test_unit_conversion_prefactor(self):
        # m_sq * g^2 = sin^2(pi/2) = 1, so <a^2> = -e^{i phi} sinh r cosh r
        for r, phi in [(0.7, 0.0), (1.3, 1.1), (0.4, -2.0)]:
            p = params(r=r, phi=phi, a2=0.0, gt=math.pi / 2.0)
            a2, _, _ = model.sideband_moments(p)
            want = -math.sinh(r) * math.cosh(r) * np.exp(1j * phi)
            assert a2 == pytest.approx(want, rel=1e-12)

    def test_conjugacy_exact(self):
        a2, a2c, _ = model.sideband_moments(params(r=0.9, phi=0.3, t1=0.2, t2=-1.0))
        assert a2c == a2.conjugate()


class TestQuadratures:
    def test_vacuum_fixed_point_exact(self):
        p = params(r=0.0, a2=0.0)
        assert model.quadrature_variances(p) == (1.0, 1.0)
        assert model.sideband_mean_photons(p) == 0.0

    def test_maximally_squashed(self):
        var_x, var_p = model.quadrature_variances(params(r=0.5, gt=0.1))
        assert var_x == pytest.approx(1.0 + 0.04 * math.exp(-1.0), rel=1e-12)
        assert var_p == pytest.approx(1.0, abs=1e-14)

    def test_full_conversion_returns_input_squeezing(self):
        var_x, var_p = model.quadrature_variances(YELLOW)
        e2r = (math.sqrt(21.0) - math.sqrt(20.0)) ** 2
        assert var_x == pytest.approx(e2r, rel=1e-10)
        assert var_p == pytest.approx(1.0 / e2r, rel=1e-10)
        assert var_x * var_p == pytest.approx(1.0, abs=1e-9)


class TestEfficiency:
    def test_full_conversion_unity(self):
        assert model.conversion_efficiency(YELLOW) == pytest.approx(1.0, rel=1e-12)

    def test_undefined_at_zero_squeezing(self):
        with pytest.raises(ValueError):
            model.conversion_efficiency(params(r=0.0))

    def test_perturbative_limit(self):
        for gt in (1e-2, 1e-4, 1e-6):
            p = params(r=1.0, phi=math.pi, gt=gt)
            eff = model.conversion_efficiency(p)
            # <n> <= m_sq (|f| c + |g| s)^2 so eff -> 0 like (gamma t)^2
            assert eff <= 4.2 * gt**2 * (1.0 + math.cosh(1.0) / math.sinh(1.0)) ** 2
        assert model.conversion_efficiency(params(r=1.0, gt=1e-6)) < 1e-11


def params_strategy():
    angle = st.floats(-10.0, 10.0)
    return st.builds(
        params,
        r=st.floats(0.0, 3.0),
        phi=angle,
        a1=st.floats(0.0, 1.5),
        t1=angle,
        a2=st.floats(0.0, 1.5),
        t2=angle,
        gt=st.floats(0.01, 2.0),
    )


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(params_strategy())
    def test_heisenberg_bound(self, p):
        var_x, var_p = model.quadrature_variances(p)
        assert var_x * var_p >= 1.0 - 1e-9

    @settings(max_examples=100, deadline=None)
    @given(params_strategy(), st.floats(-5.0, 5.0))
    def test_diagonal_symmetry_of_mean(self, p, delta):
        # only phi + theta1 - theta2 enters <n>
        shifted = model.ModelParams.from_values(
            r=p.squeeze.r,
            phi=p.squeeze.phi + delta,
            amp1=p.eps1.amp,
            theta1=p.eps1.theta - delta,
            amp2=p.eps2.amp,
            theta2=p.eps2.theta,
            gamma_t=p.gamma_t,
        )
        a = model.sideband_mean_photons(p)
        b = model.sideband_mean_photons(shifted)
        assert b == pytest.approx(a, rel=1e-9, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(params_strategy())
    def test_two_pi_periodicity(self, p):
        shifted = model.ModelParams.from_values(
            r=p.squeeze.r,
            phi=p.squeeze.phi + 2.0 * math.pi,
            amp1=p.eps1.amp,
            theta1=p.eps1.theta + 2.0 * math.pi,
            amp2=p.eps2.amp,
            theta2=p.eps2.theta + 2.0 * math.pi,
            gamma_t=p.gamma_t,
        )
        for attr in ("mean_n", "var_x", "var_p"):
            a = getattr(model.observables(p), attr)
            b = getattr(model.observables(shifted), attr)
            assert b == pytest.approx(a, rel=1e-9, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(params_strategy())
    def test_principal_variances_bracket_fixed_ones(self, p):
        obs = model.observables(p)
        assert obs.var_min <= min(obs.var_x, obs.var_p) + 1e-12
        assert obs.var_max >= max(obs.var_x, obs.var_p) - 1e-12
        assert obs.var_min * obs.var_max >= 1.0 - 1e-9
