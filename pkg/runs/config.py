"""
Run configuration: flat key=value files and their merge with command-line
flags.

Precedence is settings.TEMPVAE < settings.TEMPVAE_HIGH_DIM (high_dim runs)
< config file < flags. Manifests written by earlier runs are valid config
files; their bookkeeping keys are skipped.
"""
from pathlib import Path

from rest_framework.exceptions import ValidationError

from runs.exceptions import RunConfigError
from runs.serializers import ModelConfigSerializer
from tempvae.config import ModelConfig

RUN_KEYS = {
    "id",
    "command",
    "seed",
    "status",
    "variant",
    "output_dir",
    "created_at",
    "finished_at",
    "dataset",
    "estimator",
    "checkpoint",
    "kind",
    "T",
    "d",
    "k",
    "noise_std",
    "samples",
    "hs_window",
    "n_eval",
    "diagonal_only",
}
RUN_PREFIXES = ("input.", "summary.")


def parse_key_values(text, source="config"):
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, separator, value = line.partition("=")
        key = key.strip()
        if not separator or not key:
            raise RunConfigError(f"{source}, line {number}: expected key=value, got {raw!r}")
        if key in values:
            raise RunConfigError(f"{source}, line {number}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def read_key_values(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise RunConfigError(f"cannot read {path}: {error}") from error
    return parse_key_values(text, source=str(path))


def model_keys(values):
    """Drop run bookkeeping keys; everything left must be a model setting."""
    return {
        key: value
        for key, value in values.items()
        if key not in RUN_KEYS and not key.startswith(RUN_PREFIXES)
    }


def format_errors(detail):
    if isinstance(detail, dict):
        return "; ".join(f"{key}: {format_errors(value)}" for key, value in detail.items())
    if isinstance(detail, list):
        return " ".join(format_errors(item) for item in detail)
    return str(detail)


def resolve_model_config(obs_dim, file_values=None, flags=None):
    """ModelConfig for `obs_dim` assets from config-file values and flags."""
    merged = model_keys(file_values or {})
    merged.update({key: value for key, value in (flags or {}).items() if value is not None})
    serializer = ModelConfigSerializer(data=merged)
    try:
        serializer.is_valid(raise_exception=True)
    except ValidationError as error:
        raise RunConfigError(f"invalid configuration: {format_errors(error.detail)}") from error
    overrides = dict(serializer.validated_data)
    declared = overrides.pop("obs_dim", None)
    if declared is not None and declared != obs_dim:
        raise RunConfigError(f"configuration is for {declared} assets but the data has {obs_dim}")
    try:
        return ModelConfig.from_settings(obs_dim, **overrides)
    except ValueError as error:
        raise RunConfigError(f"invalid configuration: {error}") from error


def resolve_seed(flag, file_values=None):
    if flag is not None:
        return int(flag)
    raw = (file_values or {}).get("seed")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as error:
        raise RunConfigError(f"seed must be an integer, got {raw!r}") from error


def format_value(value):
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(item) for item in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)
