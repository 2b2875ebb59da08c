"""
Flat checkpoint codec.

A checkpoint is two files: `<stem>.bin` holding every array as
little-endian float64 back to back, and `<stem>.manifest`, one line per
array with its name, shape (`3x16`, `-` for scalars) and byte offset.
"""
from pathlib import Path

import numpy as np

from nncore.exceptions import CheckpointError

DTYPE = np.dtype("<f8")
HEADER = "# name shape offset"


def _format_shape(shape):
    return "x".join(str(size) for size in shape) if shape else "-"


def _parse_shape(text):
    return () if text == "-" else tuple(int(size) for size in text.split("x"))


def save_arrays(stem, arrays):
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    lines = [HEADER]
    chunks = []
    offset = 0
    for name, value in arrays.items():
        if any(char.isspace() for char in name):
            raise CheckpointError(f"array name {name!r} contains whitespace")
        value = np.asarray(value, dtype=DTYPE)
        lines.append(f"{name} {_format_shape(value.shape)} {offset}")
        chunks.append(value.reshape(-1))
        offset += value.size * DTYPE.itemsize
    payload = np.concatenate(chunks) if chunks else np.zeros(0, dtype=DTYPE)
    payload.astype(DTYPE).tofile(stem.with_suffix(".bin"))
    stem.with_suffix(".manifest").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_arrays(stem):
    stem = Path(stem)
    manifest_path = stem.with_suffix(".manifest")
    binary_path = stem.with_suffix(".bin")
    if not manifest_path.exists() or not binary_path.exists():
        raise CheckpointError(f"checkpoint {stem} is incomplete")
    payload = np.fromfile(binary_path, dtype=DTYPE)
    arrays = {}
    for number, line in enumerate(manifest_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            name, shape_text, offset_text = line.split()
            shape = _parse_shape(shape_text)
            start = int(offset_text) // DTYPE.itemsize
        except ValueError as exc:
            raise CheckpointError(f"{manifest_path}:{number}: malformed entry {line!r}") from exc
        count = int(np.prod(shape)) if shape else 1
        if start + count > payload.size:
            raise CheckpointError(f"{manifest_path}:{number}: {name} runs past the end of the data")
        arrays[name] = payload[start:start + count].reshape(shape).astype(np.float64)
    return arrays
