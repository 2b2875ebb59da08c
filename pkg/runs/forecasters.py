import numpy as np
from django.conf import settings
from django.core.management.base import CommandError

from benchmarks.garch import fit_assets
from evaluation.backtest import GarchForecaster, HistoricalForecaster, TempVaeForecaster
from market.returns import prepare_windows
from runs.manifest import file_digest
from tempvae.network import TempVae
from tempvae.training import CHECKPOINT_STEM, load_model_parameters

ESTIMATORS = ("tempvae", "garch", "hs")


def add_estimator_arguments(parser, choices=ESTIMATORS):
    parser.add_argument("estimator", choices=choices)
    parser.add_argument("--checkpoint", help="output directory of a train run (tempvae)")
    parser.add_argument("--samples", type=int, default=None, help="Monte-Carlo draws per day")
    parser.add_argument("--window", dest="window", type=int, default=None)
    parser.add_argument("--train-frac", dest="train_frac", type=float, default=None)
    parser.add_argument("--config", help="flat key=value configuration file")


def build_forecaster(command, options, dataset):
    """
    Forecaster, train/test split and run configuration for `estimator`.

    The test set starts after the rows covered by the training windows;
    GARCH is fitted on those rows only.
    """
    estimator = options["estimator"]
    d = dataset.shape[1]
    samples = options.get("samples") or settings.VAR_SAMPLES
    digests = dict(dataset.digests)
    if estimator == "tempvae":
        checkpoint = options.get("checkpoint")
        if not checkpoint:
            raise CommandError("the tempvae estimator needs --checkpoint")
        config = command.checkpoint_config(checkpoint, d)
        windows = prepare_windows(dataset.returns, config.window, config.train_frac)
        digests[CHECKPOINT_STEM] = file_digest(f"{checkpoint}/{CHECKPOINT_STEM}.bin")
        model = load_model_parameters(TempVae(config, np.random.default_rng(command.seed)), checkpoint)
        forecaster = TempVaeForecaster(model, windows, n_samples=samples)
        run_config = {"variant": config.variant_name, "checkpoint": checkpoint, **config.as_dict()}
    else:
        split = {"window": options.get("window"), "train_frac": options.get("train_frac")}
        config = command.model_config(d, split)
        windows = prepare_windows(dataset.returns, config.window, config.train_frac)
        training = dataset.returns[:windows.train_rows]
        run_config = {"window": config.window, "train_frac": config.train_frac}
        if estimator == "garch":
            fits = fit_assets(training, dataset.assets, strict=False)
            forecaster = GarchForecaster(
                [fit.params for fit in fits], initials=training.var(axis=0), n_samples=samples
            )
        else:
            forecaster = HistoricalForecaster(settings.HS_WINDOW)
            samples = None
            run_config["hs_window"] = settings.HS_WINDOW
    run_config.update({"estimator": estimator, "dataset": dataset.name, "samples": samples, **dataset.params})
    return forecaster, windows, run_config, digests
