from benchmarks.garch import fit_assets, write_garch_params_csv
from market.returns import prepare_windows
from runs.cli import RunCommand
from runs.datasets import add_dataset_arguments, load_dataset


class Command(RunCommand):
    help = "Fit a univariate GARCH(1,1) to every asset of a data set."
    command_name = "garch_fit"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        add_dataset_arguments(parser)
        parser.add_argument("--config", help="flat key=value configuration file")
        parser.add_argument("--window", dest="window", type=int, default=None)
        parser.add_argument("--train-frac", dest="train_frac", type=float, default=None)
        parser.add_argument("--full-series", dest="full_series", action="store_true",
                            help="fit on every row instead of the training rows")
        parser.add_argument("--strict", action="store_true", help="fail when a fit does not converge")

    def run(self, options):
        dataset = load_dataset(options, self.seed)
        rows = len(dataset.returns)
        config = {"dataset": dataset.name, **dataset.params}
        if not options["full_series"]:
            split = self.model_config(dataset.shape[1], options)
            rows = prepare_windows(dataset.returns, split.window, split.train_frac).train_rows
            config.update(window=split.window, train_frac=split.train_frac)
        self.begin(config, dataset.digests)
        fits = fit_assets(dataset.returns[:rows], dataset.assets, strict=options["strict"])
        write_garch_params_csv(self.out / "garch_params.csv", dataset.assets, fits)
        for asset, fit in zip(dataset.assets, fits):
            params = fit.params
            self.stdout.write(
                f"{asset}: mu={params.mu:.4g} omega={params.omega:.4g} "
                f"alpha={params.alpha:.4f} beta={params.beta:.4f}"
            )
        return {"assets": len(fits), "rows": rows, "loglik": sum(fit.loglik for fit in fits)}
