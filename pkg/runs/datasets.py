import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from market.csvio import default_assets, default_labels, load_prices_csv, load_returns_csv
from market.generators import gen_noise, osc_pca_prices
from runs.manifest import file_digest

logger = logging.getLogger(__name__)

SYNTHETIC_KINDS = ("noise", "osc-pca")


@dataclass
class Dataset:
    """A T x d log-return matrix with its labels and provenance."""

    name: str
    dates: list
    assets: list
    returns: np.ndarray
    digests: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    prices: np.ndarray = None

    @property
    def shape(self):
        return self.returns.shape


def synthetic_dataset(kind, T, d, k=2, noise_std=0.02, seed=0):
    rng = np.random.default_rng(seed)
    params = {"kind": kind, "T": T, "d": d}
    prices = None
    if kind == "noise":
        returns = gen_noise(T, d, rng)
    elif kind == "osc-pca":
        generated = osc_pca_prices(T, k, d=d, rng=rng, noise_std=noise_std)
        prices = generated.prices
        returns = generated.returns
        params.update(k=k, noise_std=noise_std)
    else:
        raise ValueError(f"unknown synthetic data kind {kind!r}, expected one of {SYNTHETIC_KINDS}")
    name = kind if kind == "noise" else f"{kind}-{k}"
    return Dataset(name, default_labels(T), default_assets(d), returns, params=params, prices=prices)


def add_dataset_arguments(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--returns", help="CSV of log returns (date column, one column per asset)")
    source.add_argument("--prices", help="CSV of positive prices; log returns are taken")
    source.add_argument("--synthetic", choices=SYNTHETIC_KINDS, help="generate the data in-process")
    parser.add_argument("--T", dest="T", type=int, default=5050, help="synthetic length")
    parser.add_argument("--d", dest="d", type=int, default=22, help="synthetic asset count")
    parser.add_argument("--k", dest="k", type=int, default=2, help="oscillating factors")
    parser.add_argument("--noise-std", dest="noise_std", type=float, default=0.02)


def load_dataset(options, seed=0):
    if options.get("returns"):
        path = Path(options["returns"])
        series = load_returns_csv(path)
        dataset = Dataset(path.name, series.dates, series.assets, series.returns)
        dataset.digests[path.name] = file_digest(path)
    elif options.get("prices"):
        path = Path(options["prices"])
        series = load_prices_csv(path).log_returns()
        dataset = Dataset(path.name, series.dates, series.assets, series.returns)
        dataset.digests[path.name] = file_digest(path)
    else:
        dataset = synthetic_dataset(
            options["synthetic"], options["T"], options["d"], options["k"], options["noise_std"], seed
        )
    logger.info("dataset %s: %d rows, %d assets", dataset.name, *dataset.shape)
    return dataset
