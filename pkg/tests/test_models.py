"""Tests for the Wilson-Cowan coefficients, the four input scenarios and the
numeric assumption validators."""
import math

import numpy as np
import pytest

from skorokhod_sde import (
    CompoundPoissonSpec,
    JumpSizeDist,
    ScenarioConfig,
    ScenarioError,
    WilsonCowanParams,
    check_jump_coefficient_bound,
    estimate_lipschitz_constant,
    make_scenario,
    sigmoid_F,
    uniform_grid,
    wilson_cowan_diffusion,
    wilson_cowan_drift,
)


def reference_F(x, theta, a):
    return 1.0 / (1.0 + math.exp(-a * (x - theta))) - 1.0 / (1.0 + math.exp(a * theta))


def reference_drift(state, p: WilsonCowanParams):
    """Independent scalar re-implementation of the drift, for cross-checking."""
    r_e, r_i = state
    x_e = p.w_EE * r_e - p.w_EI * r_i + p.I_ext_E
    x_i = p.w_IE * r_e - p.w_II * r_i + p.I_ext_I
    d_e = (-r_e + (1 - p.delta_E * r_e) * reference_F(x_e, p.theta_E, p.a_E)) / p.tau_E
    d_i = (-r_i + (1 - p.delta_I * r_i) * reference_F(x_i, p.theta_I, p.a_I)) / p.tau_I
    return d_e, d_i


class TestSigmoid:
    def test_zero_point(self):
        for theta, a in [(2.8, 1.2), (4.0, 1.0), (0.5, 7.0)]:
            assert sigmoid_F(0.0, theta, a) == pytest.approx(0.0, abs=1e-15)

    def test_value_at_threshold(self):
        theta, a = 3.0, 2.0
        expected = 0.5 - 1.0 / (1.0 + math.exp(a * theta))
        assert sigmoid_F(theta, theta, a) == pytest.approx(expected, abs=1e-14)

    def test_default_threshold_value(self):
        assert sigmoid_F(2.8, 2.8, 1.2) == pytest.approx(0.46643077671851746, abs=1e-12)

    def test_monotone_and_limit(self):
        # away from the saturated tails, where the float gradient is nonzero
        xs = np.linspace(-5.0, 10.0, 500)
        vals = sigmoid_F(xs, 2.8, 1.2)
        assert np.all(np.diff(vals) > 0)
        limit = 1.0 - 1.0 / (1.0 + math.exp(1.2 * 2.8))
        assert sigmoid_F(1e4, 2.8, 1.2) == pytest.approx(limit, abs=1e-12)

    def test_overflow_safe(self):
        assert np.isfinite(sigmoid_F(-1e6, 2.8, 1.2))
        assert np.isfinite(sigmoid_F(1e6, 2.8, 1.2))


class TestParams:
    def test_defaults_valid(self):
        p = WilsonCowanParams()
        assert p.tau_E == 1.0 and p.tau_I == 2.0
        assert p.delta_E == 0.2

    def test_invariants(self):
        with pytest.raises(ValueError):
            WilsonCowanParams(tau_E=-1.0)
        with pytest.raises(ValueError):
            WilsonCowanParams(a_I=0.0)
        with pytest.raises(ValueError):
            WilsonCowanParams(delta_E=1.5)
        with pytest.raises(ValueError):
            WilsonCowanParams(w_EI=-2.0)
        with pytest.raises(ValueError):
            WilsonCowanParams(sigma_ext_I=-0.1)


class TestDrift:
    def test_resting_state_fixed_point(self):
        p = WilsonCowanParams()
        d = wilson_cowan_drift(np.array([[0.0, 0.0]]), p, 0.0, 0.0)
        assert np.max(np.abs(d)) == pytest.approx(0.0, abs=1e-15)

    def test_balance_case(self):
        # delta = 0 and a gain saturated near 1 balances the decay at r = 1
        p = WilsonCowanParams(delta_E=0.0, theta_E=5.0, a_E=20.0, tau_E=1.0)
        d = wilson_cowan_drift(np.array([[1.0, 0.0]]), p, 0.0, 0.0)
        gain = sigmoid_F(p.w_EE * 1.0, p.theta_E, p.a_E)
        assert gain == pytest.approx(1.0, abs=1e-6)
        assert d[0, 0] == pytest.approx(-1.0 + gain, abs=1e-12)
        assert d[0, 0] == pytest.approx(0.0, abs=1e-6)

    def test_dual_implementation(self):
        p = WilsonCowanParams()
        rng = np.random.default_rng(0)
        states = rng.uniform(0.0, 1.0, size=(50, 2))
        batch = wilson_cowan_drift(states, p, p.I_ext_E, p.I_ext_I)
        for state, d in zip(states, batch):
            ref = reference_drift(state, p)
            assert d[0] == pytest.approx(ref[0], abs=1e-12)
            assert d[1] == pytest.approx(ref[1], abs=1e-12)

    def test_specific_state(self):
        p = WilsonCowanParams()
        d = wilson_cowan_drift(np.array([0.1, 0.05]), p, 0.0, 0.0)
        ref = reference_drift((0.1, 0.05), p)
        assert np.allclose(d, ref, atol=1e-12)

    def test_negative_beyond_saturation(self):
        # above r = 1/delta the decay dominates the bounded gain term
        p = WilsonCowanParams()
        for r_e in (5.0 + 1e-6, 6.0, 10.0):
            d = wilson_cowan_drift(np.array([r_e, 0.3]), p, 0.0, 0.0)
            assert d[0] < 0.0


class TestDiffusion:
    def test_zero_amplitude(self):
        p = WilsonCowanParams(sigma_ext_E=0.0, sigma_ext_I=0.0)
        g = wilson_cowan_diffusion(np.array([0.4, 0.2]), p)
        assert not g.any()

    def test_vanishes_at_saturation(self):
        p = WilsonCowanParams()
        g = wilson_cowan_diffusion(np.array([1.0 / p.delta_E, 0.0]), p)
        assert g[0] == pytest.approx(0.0, abs=1e-15)

    def test_default_amplitude_arithmetic(self):
        p = WilsonCowanParams()
        g = wilson_cowan_diffusion(np.array([0.5, 0.0]), p)
        assert g[0] == pytest.approx(0.1 * 0.9, abs=1e-15)


class TestScenarios:
    def _config(self, mode, intensity=0.0):
        spec = CompoundPoissonSpec(intensity, JumpSizeDist.exponential(1.0))
        return ScenarioConfig(
            input_mode=mode, jumps_E=spec, jumps_I=spec,
            grid=uniform_grid(0.1, 10.0),
        )

    def test_white_noise_mode(self):
        model = make_scenario(self._config("white_noise"))
        assert model.jump_specs is None
        assert not np.isfinite(model.domain.lower).any()
        g = model.diffusion(np.array([[0.0, 0.0]]))
        assert g[0, 0] == pytest.approx(0.1)

    def test_ou_current_mode(self):
        model = make_scenario(self._config("ou_current"))
        assert model.input_current is not None
        assert not model.diffusion(np.array([[0.2, 0.1]])).any()
        assert not np.isfinite(model.domain.lower).any()

    def test_ou_reflected_mode(self):
        model = make_scenario(self._config("ou_reflected"))
        assert np.array_equal(model.domain.lower, [0.0, 0.0])
        assert model.jump_specs is None

    def test_ou_reflected_jumps_mode(self):
        model = make_scenario(self._config("ou_reflected_jumps", intensity=0.5))
        assert model.jump_specs is not None
        assert len(model.jump_specs) == 2
        rho = model.jump_coeff(np.array([[0.1, 0.2]]))
        assert np.allclose(rho, 0.01)

    def test_jumps_without_reflection_rejected(self):
        with pytest.raises(ScenarioError):
            make_scenario(self._config("white_noise", intensity=0.5))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            ScenarioConfig(input_mode="pink_noise")

    def test_shared_input_current(self):
        # the OU current enters both external inputs with equal weight
        model = make_scenario(self._config("ou_current"))
        state = np.array([[0.1, 0.1]])
        d0 = model.drift(state, np.array([0.0]))
        d1 = model.drift(state, np.array([0.5]))
        assert d1[0, 0] != d0[0, 0]
        assert d1[0, 1] != d0[0, 1]


class TestLipschitzEstimate:
    BOX = (np.array([-1.0, -1.0]), np.array([1.0, 1.0]))

    def test_constant_function(self):
        est, n = estimate_lipschitz_constant(
            lambda x: np.ones(x.shape[0]), self.BOX, n_samples=1000
        )
        assert est == 0.0
        assert n == 1000

    def test_identity_map(self):
        est, _ = estimate_lipschitz_constant(lambda x: x, self.BOX, n_samples=10**5)
        assert est == pytest.approx(1.0, abs=1e-6)

    def test_sigmoid_bound(self):
        a = 1.2
        est, _ = estimate_lipschitz_constant(
            lambda x: sigmoid_F(x[:, 0], 2.8, a),
            (np.array([-5.0]), np.array([10.0])),
            n_samples=10**5,
        )
        assert est <= a / 4.0 * (1.0 + 1e-6)


class TestJumpCoefficientBound:
    BOX = (np.zeros(2), np.ones(2))

    def test_zero_coefficient(self):
        spec = CompoundPoissonSpec(1.0, JumpSizeDist.exponential(1.0))
        report = check_jump_coefficient_bound(
            lambda x, xi: np.zeros_like(xi), spec, self.BOX, n_samples=1000
        )
        assert report.c_rho == 0.0
        assert report.passed

    def test_state_independent_coefficient(self):
        spec = CompoundPoissonSpec(1.0, JumpSizeDist.constant(1.0))
        report = check_jump_coefficient_bound(
            lambda x, xi: xi, spec, self.BOX, n_samples=10**4
        )
        assert report.lipschitz_ratio == 0.0
        assert report.growth_ratio <= 1.0 + 1e-12
        assert report.growth_ratio >= 0.95

    def test_linear_coefficient_second_moment(self):
        spec = CompoundPoissonSpec(1.0, JumpSizeDist.exponential(1.0))
        report = check_jump_coefficient_bound(
            lambda x, xi: xi[:, None] * x[None, :], spec, self.BOX, n_samples=10**5
        )
        assert report.lipschitz_ratio == pytest.approx(2.0, rel=0.05)

    def test_infinite_second_moment_impossible(self):
        # every shipped jump-size family has a finite second moment
        for dist in (JumpSizeDist.constant(3.0), JumpSizeDist.exponential(2.0),
                     JumpSizeDist.uniform(-1.0, 4.0)):
            assert np.isfinite(dist.second_moment())
