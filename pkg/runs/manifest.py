import hashlib
from pathlib import Path

from django.utils import timezone

from runs.config import format_value, read_key_values
from runs.exceptions import RunConfigError
from runs.models import Run
from runs.serializers import RunSerializer

MANIFEST_NAME = "manifest.txt"


def file_digest(path, chunk_size=1 << 20):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


def start_run(command, seed, config, input_digests, output_dir):
    return Run.objects.create(
        command=command,
        seed=seed,
        config=config,
        input_digests=input_digests,
        output_dir=str(output_dir),
    )


def finish_run(run, summary=None, status=Run.Status.DONE):
    run.summary = summary or {}
    run.status = status
    run.finished_at = timezone.now()
    run.save(update_fields=["summary", "status", "finished_at"])
    return run


def manifest_lines(run):
    data = RunSerializer(run).data
    lines = [
        f"command={data['command']}",
        f"seed={data['seed']}",
        f"status={data['status']}",
        f"output_dir={data['output_dir']}",
    ]
    lines += [f"{key}={format_value(value)}" for key, value in data["config"].items()]
    lines += [f"input.{name}={digest}" for name, digest in data["input_digests"].items()]
    lines += [f"summary.{key}={format_value(value)}" for key, value in data["summary"].items()]
    return lines


def write_manifest(run, directory):
    path = Path(directory) / MANIFEST_NAME
    path.write_text("\n".join(manifest_lines(run)) + "\n", encoding="utf-8")
    return path


def read_manifest(directory):
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise RunConfigError(f"no {MANIFEST_NAME} in {directory}")
    return read_key_values(path)
