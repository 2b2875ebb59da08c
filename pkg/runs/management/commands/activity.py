import numpy as np
import pandas as pd
from django.conf import settings

from evaluation.activity import activity_statistic
from market.returns import prepare_windows
from runs.cli import RunCommand
from runs.datasets import add_dataset_arguments, load_dataset
from runs.manifest import file_digest
from tempvae.network import TempVae
from tempvae.training import CHECKPOINT_STEM, load_model_parameters


class Command(RunCommand):
    help = "Compute the latent activity grid of a trained model over a data set."
    command_name = "activity"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_arguments(parser)
        parser.add_argument("--checkpoint", required=True, help="output directory of a train run")
        parser.add_argument("--n-eval", dest="n_eval", type=int, default=None, help="cap on windows used")

    def run(self, options):
        dataset = load_dataset(options, self.seed)
        config = self.checkpoint_config(options["checkpoint"], dataset.shape[1])
        windows = prepare_windows(dataset.returns, config.window, config.train_frac)
        digests = dict(dataset.digests)
        digests[CHECKPOINT_STEM] = file_digest(f"{options['checkpoint']}/{CHECKPOINT_STEM}.bin")
        self.begin(
            {
                "variant": config.variant_name,
                "dataset": dataset.name,
                "checkpoint": options["checkpoint"],
                "n_eval": options["n_eval"],
                **dataset.params,
                **config.as_dict(),
            },
            digests,
        )
        model = load_model_parameters(TempVae(config, np.random.default_rng(self.seed)), options["checkpoint"])
        activity = activity_statistic(
            model, windows.windows, n_eval=options["n_eval"], rng=np.random.default_rng(self.seed), seed=self.seed
        )
        activity.write_csv(self.out / "activity.csv")
        steps, units = activity.shape
        active = [len(activity.active_columns(step)) for step in range(steps)]
        summary = {
            "steps": steps,
            "units": units,
            "avg_active_count": activity.avg_active_count(),
            "inactive_cells": int(activity.inactive.sum()),
            "min_active_per_step": min(active),
            "max_active_per_step": max(active),
        }
        pd.DataFrame([summary]).to_csv(
            self.out / "activity_summary.csv", index=False, float_format=settings.CSV_FLOAT_FORMAT
        )
        self.stdout.write(f"average active count: {summary['avg_active_count']:.1f}%")
        for step in range(steps):
            self.stdout.write(f"step {step + 1}: active {activity.active_columns(step)}")
        return summary
