import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from benchmarks.garch import GarchParams, simulate_garch
from market.csvio import ReturnSeries, default_assets, default_labels, write_returns_csv
from runs.config import read_key_values, resolve_model_config
from runs.models import EpochMetric, Run

TINY_MODEL = {
    "latent_dim": 2,
    "rnn_dim": 3,
    "prior_rnn_dim": 3,
    "mlp_hidden": "3,3",
    "window": 3,
    "epochs": 3,
    "batch_size": 16,
}


def sample_config_file(directory, **params):
    defaults = dict(TINY_MODEL)
    defaults.update(params)
    path = Path(directory) / "tiny.cfg"
    path.write_text("".join(f"{key}={value}\n" for key, value in defaults.items()))
    return path


def run_command(name, *args, **options):
    out = StringIO()
    call_command(name, *args, stdout=out, stderr=StringIO(), **options)
    return out.getvalue()


class GenCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_noise(self):
        run_command("gen", "noise", T=300, d=3, seed=4, out=str(self.dir / "noise"))

        frame = pd.read_csv(self.dir / "noise" / "returns.csv")
        manifest = read_key_values(self.dir / "noise" / "manifest.txt")
        self.assertEqual(frame.shape, (300, 4))
        self.assertEqual((manifest["command"], manifest["seed"], manifest["status"]), ("gen", "4", "done"))
        self.assertEqual(Run.objects.get().summary, {"rows": 300, "assets": 3})

    def test_same_seed_same_files(self):
        for name in ("a", "b"):
            run_command("gen", "osc-pca", T=200, k=2, seed=9, out=str(self.dir / name))

        for file_name in ("returns.csv", "prices.csv"):
            self.assertEqual(
                (self.dir / "a" / file_name).read_bytes(), (self.dir / "b" / file_name).read_bytes()
            )

    def test_oscillating_factors_have_22_columns(self):
        run_command("gen", "osc-pca", T=200, k=2, out=str(self.dir))

        self.assertEqual(pd.read_csv(self.dir / "returns.csv").shape, (200, 23))
        self.assertEqual(pd.read_csv(self.dir / "prices.csv").shape, (201, 23))

    def test_invalid_kind_and_params(self):
        with self.assertRaises(CommandError):
            run_command("gen", "brownian", out=str(self.dir))
        with self.assertRaises(CommandError):
            run_command("gen", "osc-pca", k=30, d=22, out=str(self.dir))


class TrainCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.config = sample_config_file(self.dir)

    def tearDown(self):
        self.tmp.cleanup()

    def train(self, out, **options):
        defaults = {"synthetic": "noise", "T": 80, "d": 2, "seed": 1, "config": str(self.config)}
        defaults.update(options)
        return run_command("train", out=str(self.dir / out), **defaults)

    def test_writes_checkpoint_metrics_and_manifest(self):
        self.train("run")

        metrics = pd.read_csv(self.dir / "run" / "metrics.csv")
        manifest = read_key_values(self.dir / "run" / "manifest.txt")
        self.assertEqual(metrics["epoch"].tolist(), [0, 1, 2])
        self.assertEqual(
            list(metrics.columns), ["epoch", "loss", "reconstruction", "kl", "beta", "learning_rate"]
        )
        self.assertTrue((self.dir / "run" / "params.bin").exists())
        self.assertEqual(EpochMetric.objects.count(), 3)
        self.assertEqual((manifest["variant"], manifest["obs_dim"]), ("TempVAE", "2"))
        self.assertIn("summary.test_elbo", manifest)

    def test_no_anneal_keeps_beta_at_one(self):
        self.train("flat", no_anneal=True)

        self.assertTrue(np.all(pd.read_csv(self.dir / "flat" / "metrics.csv")["beta"] == 1.0))
        self.assertEqual(Run.objects.get().variant, "TempVAE noAnneal")

    def test_conflicting_flags(self):
        with self.assertRaisesRegex(CommandError, "no_anneal"):
            self.train("bad", no_anneal=True, deterministic_bottleneck=True)

    def test_resume_is_bit_identical(self):
        self.train("straight", epochs=4)
        self.train("resumed", epochs=2)
        self.train("resumed", epochs=4, resume=True)

        self.assertEqual(
            (self.dir / "straight" / "params.bin").read_bytes(),
            (self.dir / "resumed" / "params.bin").read_bytes(),
        )
        straight = pd.read_csv(self.dir / "straight" / "metrics.csv")
        resumed = pd.read_csv(self.dir / "resumed" / "metrics.csv")
        self.assertEqual(resumed["epoch"].tolist(), [0, 1, 2, 3])
        np.testing.assert_allclose(resumed["loss"], straight["loss"], rtol=1e-10)

    def test_manifest_reproduces_the_configuration(self):
        self.train("run", ar_decoder=True)

        values = read_key_values(self.dir / "run" / "manifest.txt")

        expected = resolve_model_config(2, read_key_values(self.config), {"ar_decoder": True})
        self.assertEqual(resolve_model_config(2, values), expected)
        self.assertEqual(expected.mlp_hidden, (3, 3))


class EvaluationCommandTests(TestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        cls.data = cls.dir / "returns.csv"
        returns = np.random.default_rng(5).normal(0.0, 0.01, size=(400, 2))
        write_returns_csv(cls.data, ReturnSeries(default_labels(400), default_assets(2), returns))
        run_command(
            "train",
            returns=str(cls.data),
            config=str(sample_config_file(cls.dir)),
            out=str(cls.dir / "model"),
            seed=2,
        )

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def out(self, name):
        return str(self.dir / name)

    def test_activity_grid(self):
        output = run_command(
            "activity", returns=str(self.data), checkpoint=self.out("model"), out=self.out("activity")
        )

        grid = pd.read_csv(self.dir / "activity" / "activity.csv")
        summary = pd.read_csv(self.dir / "activity" / "activity_summary.csv")
        self.assertEqual(list(grid.columns), ["step", "z1", "z2"])
        self.assertEqual(len(grid), 3)
        self.assertTrue(0.0 <= summary.loc[0, "avg_active_count"] <= 100.0)
        self.assertIn("average active count", output)

    def test_activity_rejects_other_asset_count(self):
        with self.assertRaisesRegex(CommandError, "2 assets"):
            run_command(
                "activity", synthetic="noise", T=100, d=3, checkpoint=self.out("model"), out=self.out("bad")
            )

    def test_historical_simulation_backtest(self):
        run_command("backtest", "hs", returns=str(self.data), out=self.out("hs"), plot=True)

        summary = pd.read_csv(self.dir / "hs" / "summary.csv")
        days = pd.read_csv(self.dir / "hs" / "backtest.csv")
        for column in ("RLF95", "RLF99", "Br95", "Br99"):
            self.assertIn(column, summary.columns)
        self.assertEqual(summary.loc[0, "warmup"], 180)
        self.assertEqual(summary.loc[0, "effective_days"], len(days))
        self.assertTrue((self.dir / "hs" / "var.svg").exists())

    def test_garch_backtest_is_deterministic(self):
        for name in ("g1", "g2"):
            run_command("backtest", "garch", returns=str(self.data), samples=200, seed=3, out=self.out(name))

        self.assertEqual(
            (self.dir / "g1" / "backtest.csv").read_bytes(), (self.dir / "g2" / "backtest.csv").read_bytes()
        )

    def test_tempvae_backtest(self):
        run_command(
            "backtest", "tempvae", returns=str(self.data), checkpoint=self.out("model"),
            samples=200, out=self.out("tv"),
        )

        summary = pd.read_csv(self.dir / "tv" / "summary.csv")
        self.assertEqual(summary.loc[0, "estimator"], "tempvae")
        self.assertEqual(summary.loc[0, "skipped_days"], 0)

    def test_tempvae_needs_a_checkpoint(self):
        with self.assertRaisesRegex(CommandError, "checkpoint"):
            run_command("backtest", "tempvae", returns=str(self.data), out=self.out("none"))

    def test_unknown_estimator(self):
        with self.assertRaises(CommandError):
            run_command("backtest", "arima", returns=str(self.data), out=self.out("none"))

    def test_score(self):
        output = run_command(
            "score", "tempvae", returns=str(self.data), checkpoint=self.out("model"),
            samples=200, out=self.out("score"),
        )

        scores = pd.read_csv(self.dir / "score" / "scores.csv")
        self.assertEqual(list(scores.columns), ["day", "date", "nll", "nll_diag", "nll_portfolio"])
        self.assertTrue(np.all(np.isfinite(scores["nll"])))
        self.assertIn("nll_portfolio=", output)

    def test_failed_run_is_recorded(self):
        with self.assertRaises(CommandError):
            run_command(
                "backtest", "hs", synthetic="noise", T=150, d=2, out=self.out("failed")
            )

        manifest = read_key_values(self.dir / "failed" / "manifest.txt")
        self.assertEqual(manifest["status"], "failed")


class GarchFitCommandTests(TestCase):
    def test_recovers_parameters_from_csv(self):
        with tempfile.TemporaryDirectory() as directory:
            directory = Path(directory)
            r = simulate_garch(GarchParams(0.0, 0.1, 0.1, 0.8), 5000, np.random.default_rng(8))
            write_returns_csv(directory / "r.csv", ReturnSeries(default_labels(5000), ["X"], r[:, None]))

            run_command(
                "garch_fit", returns=str(directory / "r.csv"), full_series=True, out=str(directory / "fit")
            )

            params = pd.read_csv(directory / "fit" / "garch_params.csv")
            manifest = read_key_values(directory / "fit" / "manifest.txt")

        self.assertEqual(params.loc[0, "asset"], "X")
        self.assertLess(abs(params.loc[0, "beta"] - 0.8), 0.1)
        self.assertIn("input.r.csv", manifest)
