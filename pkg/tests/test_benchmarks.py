import numpy as np
import pytest

from coset_qrc.benchmarks import (
    EchoStateNetwork,
    EsnConfig,
    MapSpec,
    esn_run_and_fit,
    generate_trajectory,
    lyapunov_exponent,
    map_error,
    map_step,
)
from coset_qrc.readout import one_step_targets

LOGISTIC = MapSpec("logistic")
HENON = MapSpec("henon")


def test_defaults():
    assert (LOGISTIC.r, LOGISTIC.init, LOGISTIC.memory) == (3.9, (0.5,), 1)
    assert (HENON.a, HENON.b, HENON.init, HENON.memory) == (1.4, 0.3, (0.0, 0.0), 2)
    with pytest.raises(ValueError):
        MapSpec("lorenz")


class TestMapStep:
    def test_logistic(self):
        assert map_step(LOGISTIC, [0.5]) == pytest.approx(0.975)

    def test_henon(self):
        assert map_step(HENON, [0.0, 0.0]) == 1.0
        assert map_step(HENON, [1.0, 0.0]) == pytest.approx(-0.4)

    def test_history_length(self):
        with pytest.raises(ValueError):
            map_step(HENON, [0.1])


class TestTrajectory:
    def test_logistic_prefix(self):
        np.testing.assert_allclose(generate_trajectory(LOGISTIC, 3), [0.5, 0.975, 0.0950625], atol=1e-15)

    def test_henon_prefix(self):
        np.testing.assert_allclose(generate_trajectory(HENON, 4), [0, 0, 1.0, -0.4], atol=1e-15)

    def test_deterministic(self):
        np.testing.assert_array_equal(generate_trajectory(HENON, 50), generate_trajectory(HENON, 50))

    def test_bounds(self):
        x = generate_trajectory(LOGISTIC, 10_000)
        assert np.all((x > 0) & (x < 1))
        h = generate_trajectory(HENON, 10_000)
        assert np.all(np.abs(h) <= 1.5)


class TestMapError:
    @pytest.mark.parametrize("spec", [LOGISTIC, HENON])
    def test_true_trajectory(self, spec):
        assert map_error(spec, generate_trajectory(spec, 1000)) < 1e-10

    def test_two_points(self):
        assert map_error(LOGISTIC, [0.5, 0.5]) == pytest.approx(0.475)

    @pytest.mark.parametrize("c, n", [(0.2, 10), (0.9, 4)])
    def test_constant(self, c, n):
        assert map_error(LOGISTIC, [c] * n) == pytest.approx(np.sqrt(n - 1) * abs(c - 3.9 * c * (1 - c)))

    def test_henon_window(self):
        # single residual: x2 - (1 - a x1^2 + b x0)
        x = [0.1, 0.2, 0.3]
        assert map_error(HENON, x) == pytest.approx(abs(0.3 - (1 - 1.4 * 0.04 + 0.3 * 0.1)))

    def test_short(self):
        with pytest.raises(ValueError):
            map_error(HENON, [0.1, 0.2])


def test_logistic_is_chaotic():
    assert lyapunov_exponent(LOGISTIC, 1000) > 0


class TestEsn:
    def test_spectral_radius(self):
        esn = EchoStateNetwork(EsnConfig(neurons=50, spectral_radius=0.9, seed=1))
        assert abs(np.max(np.abs(np.linalg.eigvals(esn.w))) - 0.9) < 1e-6

    def test_rejects_unstable(self):
        with pytest.raises(ValueError):
            EsnConfig(spectral_radius=1.5)
        with pytest.raises(ValueError):
            EsnConfig(leak=0)

    def test_bounded_state(self):
        esn = EchoStateNetwork(EsnConfig(neurons=100, seed=2), l=1)
        states = esn.drive(generate_trajectory(LOGISTIC, 1000))
        assert np.all(np.linalg.norm(states, axis=1) <= np.sqrt(100))
        assert np.all(np.isfinite(states))

    def test_fading_memory(self):
        cfg = EsnConfig(neurons=60, seed=3)
        a, b = EchoStateNetwork(cfg), EchoStateNetwork(cfg)
        b.h = np.ones(60)
        xs = generate_trajectory(LOGISTIC, 300)
        sa, sb = a.drive(xs), b.drive(xs)
        assert np.linalg.norm(sa[-1] - sb[-1]) < 1e-6 * np.linalg.norm(sa[0] - sb[0]) + 1e-9

    def test_zero_input_weights_degenerate(self):
        x, y = one_step_targets(generate_trajectory(LOGISTIC, 60))
        res = esn_run_and_fit(EsnConfig(neurons=20, seed=0), x, y, l=3, horizon=20, w_in=np.zeros(20))
        assert np.isfinite(res.error)
        assert np.allclose(res.predictions, res.predictions[0])

    def test_full_scale_finite_and_deterministic(self):
        x, y = one_step_targets(generate_trajectory(LOGISTIC, 167))
        cfg = EsnConfig(neurons=140, seed=5)
        a = esn_run_and_fit(cfg, x, y, l=10)
        b = esn_run_and_fit(cfg, x, y, l=10)
        assert a.error == b.error
        assert np.isfinite(a.error) or a.diverged
