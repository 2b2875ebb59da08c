from django.conf import settings

from evaluation.backtest import score_forecasts
from runs.cli import RunCommand
from runs.datasets import add_dataset_arguments, load_dataset
from runs.forecasters import add_estimator_arguments, build_forecaster


class Command(RunCommand):
    help = "Score next-day forecasts with the full, diagonal and portfolio Gaussian NLL."
    command_name = "score"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_arguments(parser)
        add_estimator_arguments(parser, choices=("tempvae", "garch"))
        parser.add_argument("--diagonal-only", dest="diagonal_only", action="store_true")

    def run(self, options):
        dataset = load_dataset(options, self.seed)
        forecaster, windows, config, digests = build_forecaster(self, options, dataset)
        self.begin({**config, "diagonal_only": options["diagonal_only"]}, digests)
        scores = score_forecasts(
            forecaster,
            dataset.returns,
            windows.train_rows,
            seed=self.seed,
            diagonal_only=options["diagonal_only"],
            dates=dataset.dates,
        )
        scores.to_csv(self.out / "scores.csv", index=False, float_format=settings.CSV_FLOAT_FORMAT)
        summary = {"estimator": config["estimator"], "days": len(scores)}
        for column in ("nll", "nll_diag", "nll_portfolio"):
            if scores[column].notna().any():
                summary[column] = float(scores[column].mean())
        self.stdout.write(", ".join(f"{key}={value}" for key, value in summary.items()))
        return summary
