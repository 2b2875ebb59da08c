from evaluation.backtest import backtest
from runs.cli import RunCommand
from runs.datasets import add_dataset_arguments, load_dataset
from runs.forecasters import add_estimator_arguments, build_forecaster


class Command(RunCommand):
    help = "Backtest 95% and 99% VaR of the equally weighted portfolio over the test set."
    command_name = "backtest"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_arguments(parser)
        add_estimator_arguments(parser)
        parser.add_argument("--plot", action="store_true", help="also write var.svg")

    def run(self, options):
        dataset = load_dataset(options, self.seed)
        forecaster, windows, config, digests = build_forecaster(self, options, dataset)
        self.begin(config, digests)
        report = backtest(forecaster, dataset.returns, windows.train_rows, seed=self.seed, dates=dataset.dates)
        report.write_csv(self.out / "backtest.csv", self.out / "summary.csv")
        if options["plot"]:
            report.plot_svg(self.out / "var.svg")
        summary = report.summary()
        self.stdout.write(
            ", ".join(f"{key}={value:.6g}" for key, value in summary.items() if isinstance(value, float))
        )
        return summary
