import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from benchmarks.garch import (
    GarchParams,
    garch_fit,
    garch_forecast,
    garch_forecast_stack,
    garch_loglik,
    garch_variances,
    simulate_garch,
    write_garch_params_csv,
)


def sample_params(**params):
    defaults = {"mu": 0.0, "omega": 0.1, "alpha": 0.1, "beta": 0.8}
    defaults.update(params)
    return GarchParams(**defaults)


class GarchParamsTests(SimpleTestCase):
    def test_unconditional_variance(self):
        self.assertAlmostEqual(sample_params().unconditional_variance, 1.0, places=12)

    def test_non_stationary_rejected(self):
        with self.assertRaises(ValueError):
            sample_params(alpha=0.3, beta=0.7)
        with self.assertRaises(ValueError):
            sample_params(omega=0.0)


class VarianceRecursionTests(SimpleTestCase):
    def test_matches_hand_unrolled_recursion(self):
        params = sample_params(mu=0.1, omega=0.2, alpha=0.15, beta=0.7)
        r = np.array([0.5, -1.0, 2.0])
        s1 = np.var(r)
        s2 = 0.2 + 0.15 * (0.5 - 0.1) ** 2 + 0.7 * s1
        s3 = 0.2 + 0.15 * (-1.0 - 0.1) ** 2 + 0.7 * s2
        s4 = 0.2 + 0.15 * (2.0 - 0.1) ** 2 + 0.7 * s3

        np.testing.assert_allclose(garch_variances(r, params), [s1, s2, s3], rtol=0, atol=1e-12)
        self.assertAlmostEqual(garch_forecast(params, r).std.data[0] ** 2, s4, places=12)

    def test_no_dynamics_forecasts_omega(self):
        params = sample_params(omega=0.3, alpha=0.0, beta=0.0)

        forecast = garch_forecast(params, np.random.default_rng(0).normal(size=60))

        self.assertAlmostEqual(forecast.std.data[0] ** 2, 0.3, places=12)

    def test_larger_last_shock_raises_next_variance_with_alpha(self):
        history = np.array([0.1, -0.2, 0.0, 3.0])
        variances = [
            garch_forecast(sample_params(alpha=alpha, beta=0.5), history).std.data[0] ** 2
            for alpha in (0.05, 0.1, 0.2, 0.4)
        ]

        self.assertEqual(variances, sorted(variances))

    def test_variances_are_positive(self):
        r = simulate_garch(sample_params(), 500, np.random.default_rng(1))

        self.assertTrue(np.all(garch_variances(r, sample_params()) > 0))

    def test_stacked_forecast(self):
        history = np.random.default_rng(2).normal(size=(80, 2))
        first, second = sample_params(), sample_params(mu=0.01, alpha=0.2, beta=0.5)

        stacked = garch_forecast_stack([first, second], history)

        np.testing.assert_allclose(stacked.mean.data, [0.0, 0.01])
        self.assertAlmostEqual(stacked.std.data[1], garch_forecast(second, history[:, 1]).std.data[0])


class GarchFitTests(SimpleTestCase):
    def test_recovers_simulated_parameters(self):
        truth = sample_params()
        r = simulate_garch(truth, 10000, np.random.default_rng(2024))

        fit = garch_fit(r)

        self.assertLess(abs(fit.params.omega - 0.1), 0.05)
        self.assertLess(abs(fit.params.alpha - 0.1), 0.05)
        self.assertLess(abs(fit.params.beta - 0.8), 0.05)
        self.assertLess(fit.params.alpha + fit.params.beta, 1.0)
        self.assertGreaterEqual(fit.loglik, garch_loglik(r, truth, initial=np.var(r)) - 1e-6)

    def test_white_noise_unconditional_variance(self):
        r = np.random.default_rng(7).standard_normal(10000)

        fit = garch_fit(r)

        self.assertLess(abs(fit.params.unconditional_variance - 1.0), 0.1)

    def test_short_series_rejected(self):
        with self.assertRaises(ValueError):
            garch_fit(np.zeros(49))

    def test_parameter_export(self):
        r = np.random.default_rng(3).standard_normal(400)
        fit = garch_fit(r)
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "garch.csv"
            write_garch_params_csv(path, ["A"], [fit])
            frame = pd.read_csv(path)

        self.assertEqual(list(frame.columns), ["asset", "mu", "omega", "alpha", "beta", "loglik"])
        self.assertAlmostEqual(frame.loc[0, "alpha"], fit.params.alpha, places=9)
