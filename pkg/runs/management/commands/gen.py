from market.csvio import PriceSeries, ReturnSeries, default_labels, write_prices_csv, write_returns_csv
from runs.cli import RunCommand
from runs.datasets import SYNTHETIC_KINDS, synthetic_dataset


class Command(RunCommand):
    help = "Generate a synthetic return data set (i.i.d. noise or oscillating factors)."
    command_name = "gen"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("kind", choices=SYNTHETIC_KINDS)
        parser.add_argument("--T", dest="T", type=int, default=5050, help="number of return rows")
        parser.add_argument("--d", dest="d", type=int, default=22, help="number of assets")
        parser.add_argument("--k", dest="k", type=int, default=2, help="oscillating factors")
        parser.add_argument("--noise-std", dest="noise_std", type=float, default=0.02)
        parser.add_argument("--config", help="flat key=value file (only seed is read)")

    def run(self, options):
        dataset = synthetic_dataset(
            options["kind"], options["T"], options["d"], options["k"], options["noise_std"], self.seed
        )
        self.begin({"dataset": dataset.name, **dataset.params}, {})
        write_returns_csv(
            self.out / "returns.csv", ReturnSeries(dataset.dates, dataset.assets, dataset.returns)
        )
        if dataset.prices is not None:
            prices = PriceSeries(default_labels(len(dataset.prices), start=0), dataset.assets, dataset.prices)
            write_prices_csv(self.out / "prices.csv", prices)
        self.stdout.write(f"{dataset.name}: {dataset.shape[0]} rows x {dataset.shape[1]} assets")
        return {"rows": int(dataset.shape[0]), "assets": int(dataset.shape[1])}
