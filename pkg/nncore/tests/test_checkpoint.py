import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from nncore.checkpoint import load_arrays, save_arrays
from nncore.exceptions import CheckpointError


class CheckpointTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.stem = Path(self.tmp.name) / "params"

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip(self):
        arrays = {
            "encoder.rnn.w_z": np.arange(6, dtype=float).reshape(2, 3),
            "adam.step": np.array([12.0]),
            "scale": np.array(0.25),
        }

        save_arrays(self.stem, arrays)
        loaded = load_arrays(self.stem)

        self.assertEqual(list(loaded), list(arrays))
        for name, value in arrays.items():
            np.testing.assert_array_equal(loaded[name], value)
            self.assertEqual(loaded[name].shape, value.shape)

    def test_layout_is_little_endian_float64_with_byte_offsets(self):
        save_arrays(self.stem, {"a": np.ones(3), "b": np.full((2, 2), 2.0)})

        raw = self.stem.with_suffix(".bin").read_bytes()
        lines = self.stem.with_suffix(".manifest").read_text().splitlines()

        self.assertEqual(len(raw), 7 * 8)
        self.assertEqual(np.frombuffer(raw, dtype="<f8")[3], 2.0)
        self.assertEqual(lines[1:], ["a 3 0", "b 2x2 24"])

    def test_missing_files(self):
        with self.assertRaises(CheckpointError):
            load_arrays(self.stem)

    def test_malformed_manifest(self):
        save_arrays(self.stem, {"a": np.ones(2)})
        self.stem.with_suffix(".manifest").write_text("a two 0\n")

        with self.assertRaises(CheckpointError):
            load_arrays(self.stem)
