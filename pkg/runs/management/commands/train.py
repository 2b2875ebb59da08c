import numpy as np
import pandas as pd
from django.conf import settings

from market.returns import prepare_windows
from runs.cli import RunCommand, add_model_arguments
from runs.datasets import add_dataset_arguments, load_dataset
from runs.models import EpochMetric
from runs.serializers import EpochMetricSerializer
from tempvae.network import TempVae
from tempvae.training import CHECKPOINT_STEM, Trainer

METRICS_NAME = "metrics.csv"


class Command(RunCommand):
    help = "Train a TempVAE on a return data set, writing a checkpoint and per-epoch metrics."
    command_name = "train"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_arguments(parser)
        add_model_arguments(parser)
        parser.add_argument("--resume", action="store_true", help="continue from the checkpoint in --out")
        parser.add_argument("--log-every", dest="log_every", type=int, default=10)

    def run(self, options):
        dataset = load_dataset(options, self.seed)
        config = self.model_config(dataset.shape[1], options)
        windows = prepare_windows(dataset.returns, config.window, config.train_frac)
        self.begin(
            {"variant": config.variant_name, "dataset": dataset.name, **dataset.params, **config.as_dict()},
            dataset.digests,
        )
        model = TempVae(config, np.random.default_rng(self.seed))
        trainer = Trainer(model, self.seed, log_every=options["log_every"])
        earlier = pd.DataFrame()
        if options["resume"] and (self.out / f"{CHECKPOINT_STEM}.manifest").exists():
            start = trainer.load_checkpoint(self.out)
            if (self.out / METRICS_NAME).exists():
                earlier = pd.read_csv(self.out / METRICS_NAME)
                earlier = earlier[earlier["epoch"] < start]
            self.stdout.write(f"resuming {config.variant_name} at epoch {start}")

        def on_epoch(trainer, metrics):
            EpochMetric.objects.create(run=self.run_record, **metrics.as_dict())
            if trainer.epoch % config.checkpoint_every == 0:
                self.save(trainer, earlier)

        history = trainer.fit(windows.train_windows, on_epoch=on_epoch)
        self.save(trainer, earlier)

        summary = {
            "epochs": trainer.epoch,
            "train_windows": windows.n_train,
            "test_windows": len(windows.test_windows),
        }
        if history:
            summary.update({key: value for key, value in history[-1].as_dict().items() if key != "epoch"})
        if len(windows.test_windows):
            rng = np.random.default_rng([self.seed, trainer.epoch])
            terms = model.elbo(windows.test_windows, 1.0, rng, training=False)
            summary["test_elbo"] = terms.reconstruction.item() - terms.kl.item()
        self.stdout.write(
            f"{config.variant_name}: {trainer.epoch} epochs on {windows.n_train} windows"
        )
        return summary

    def save(self, trainer, earlier):
        trainer.save_checkpoint(self.out)
        current = pd.DataFrame(EpochMetricSerializer(self.run_record.epochs.all(), many=True).data)
        pd.concat([earlier, current], ignore_index=True).to_csv(
            self.out / METRICS_NAME, index=False, float_format=settings.CSV_FLOAT_FORMAT
        )
