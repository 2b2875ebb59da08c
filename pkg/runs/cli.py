"""
Shared plumbing for the management commands: output directories, the run
registry row and manifest of every invocation, and translation of library
errors into CommandError.
"""
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from benchmarks.exceptions import GarchConvergenceError
from evaluation.exceptions import EvaluationError
from nncore.exceptions import NnCoreError
from runs.config import read_key_values, resolve_model_config, resolve_seed
from runs.manifest import finish_run, read_manifest, start_run, write_manifest
from runs.models import Run
from tempvae.exceptions import TempVaeError

logger = logging.getLogger(__name__)

LIBRARY_ERRORS = (
    ValueError,
    OSError,
    NnCoreError,
    TempVaeError,
    GarchConvergenceError,
    EvaluationError,
)

ABLATION_FLAGS = (
    ("--no-anneal", "no_anneal", "keep the KL weight at its final value"),
    ("--trainable-prior", "trainable_prior", "train the prior network"),
    ("--ar-decoder", "ar_decoder", "feed the previous return to the decoder"),
    ("--diag-cov", "diag_decoder_cov", "diagonal decoder covariance"),
    ("--zero-mean", "zero_mean_decoder", "decoder mean fixed at zero"),
    ("--backward-encoder", "backward_only_encoder", "encoder reads the window backwards only"),
    ("--no-dropout", "no_dropout", "disable recurrent dropout"),
    ("--no-l2", "no_l2", "disable the L2 penalty"),
    ("--deterministic", "deterministic_bottleneck", "deterministic latent bottleneck"),
    ("--high-dim", "high_dim", "use the high-dimensional preset"),
)

MODEL_OPTIONS = (
    ("--epochs", "epochs", int),
    ("--latent-dim", "latent_dim", int),
    ("--window", "window", int),
    ("--batch-size", "batch_size", int),
    ("--learning-rate", "learning_rate", float),
    ("--mc-samples", "mc_samples", int),
    ("--train-frac", "train_frac", float),
    ("--checkpoint-every", "checkpoint_every", int),
)


def add_model_arguments(parser):
    parser.add_argument("--config", help="flat key=value configuration file")
    for option, dest, kind in MODEL_OPTIONS:
        parser.add_argument(option, dest=dest, type=kind, default=None)
    for option, dest, help_text in ABLATION_FLAGS:
        parser.add_argument(option, dest=dest, action="store_true", default=None, help=help_text)


def model_flags(options):
    names = [dest for _, dest, _ in MODEL_OPTIONS] + [dest for _, dest, _ in ABLATION_FLAGS]
    return {name: options.get(name) for name in names}


class RunCommand(BaseCommand):
    """
    Base class of the run commands. Subclasses implement `run(options)`,
    returning a summary dict, and call `self.begin(...)` once the resolved
    configuration is known.
    """

    command_name = None

    def add_arguments(self, parser):
        parser.add_argument("--out", required=True, help="output directory")
        parser.add_argument("--seed", type=int, default=None)

    def handle(self, *args, **options):
        self.run_record = None
        self.out = Path(options["out"])
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            self.file_values = read_key_values(options["config"]) if options.get("config") else {}
            self.seed = resolve_seed(options.get("seed"), self.file_values)
            summary = self.run(options)
        except LIBRARY_ERRORS as error:
            if self.run_record is not None:
                finish_run(self.run_record, {"error": str(error)}, Run.Status.FAILED)
                write_manifest(self.run_record, self.out)
            logger.debug("%s failed", self.command_name, exc_info=True)
            raise CommandError(str(error)) from error
        finish_run(self.run_record, summary)
        write_manifest(self.run_record, self.out)
        self.stdout.write(self.style.SUCCESS(f"{self.command_name}: results in {self.out}"))

    def run(self, options):
        raise NotImplementedError

    def begin(self, config, digests):
        self.run_record = start_run(self.command_name, self.seed, config, digests, self.out)
        return self.run_record

    def model_config(self, obs_dim, options):
        return resolve_model_config(obs_dim, self.file_values, model_flags(options))

    def checkpoint_config(self, checkpoint, obs_dim):
        """ModelConfig recorded in a training run's manifest."""
        values = read_manifest(checkpoint)
        declared = values.get("obs_dim")
        if declared is not None and int(declared) != obs_dim:
            raise CommandError(
                f"checkpoint {checkpoint} was trained on {declared} assets but the data has {obs_dim}"
            )
        return resolve_model_config(obs_dim, values)
