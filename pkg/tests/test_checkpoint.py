"""Checkpoint container: round trips, ordering, and corruption handling."""

import struct

import numpy as np
import pytest

from conftest import rng
from fdcnet.checkpoint import load_checkpoint, save_checkpoint
from fdcnet.errors import FileFormatError


def _sample_state():
    r = rng(3)
    return {
        "encoder.pe.alpha_logits": r.normal(size=(42,)),
        "denoiser.stem.w": r.normal(size=(4, 2, 7)),
        "classifier.head.b2": r.normal(size=(2,)),
        "scalar": np.array(3.25),
    }


class TestRoundTrip:
    def test_bit_identical(self, tmp_path):
        path = tmp_path / "m.fdcn"
        state = _sample_state()
        save_checkpoint(path, state)
        back = load_checkpoint(path)
        assert set(back) == set(state)
        for k, v in state.items():
            np.testing.assert_array_equal(back[k], v)
            assert back[k].dtype == np.float64

    def test_deterministic_bytes_regardless_of_insertion_order(self, tmp_path):
        state = _sample_state()
        reversed_state = dict(reversed(list(state.items())))
        p1, p2 = tmp_path / "a.fdcn", tmp_path / "b.fdcn"
        save_checkpoint(p1, state)
        save_checkpoint(p2, reversed_state)
        assert p1.read_bytes() == p2.read_bytes()

    def test_paths_stored_sorted(self, tmp_path):
        path = tmp_path / "m.fdcn"
        save_checkpoint(path, _sample_state())
        raw = path.read_bytes()
        positions = [raw.index(k.encode()) for k in sorted(_sample_state())]
        assert positions == sorted(positions)

    def test_empty_state(self, tmp_path):
        path = tmp_path / "empty.fdcn"
        save_checkpoint(path, {})
        assert load_checkpoint(path) == {}


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.fdcn"
        save_checkpoint(path, _sample_state())
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(FileFormatError):
            load_checkpoint(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "m.fdcn"
        save_checkpoint(path, _sample_state())
        raw = bytearray(path.read_bytes())
        raw[4:8] = struct.pack("<I", 99)
        path.write_bytes(bytes(raw))
        with pytest.raises(FileFormatError):
            load_checkpoint(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "m.fdcn"
        save_checkpoint(path, _sample_state())
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 9])
        with pytest.raises(FileFormatError):
            load_checkpoint(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "m.fdcn"
        save_checkpoint(path, _sample_state())
        path.write_bytes(path.read_bytes() + b"\x00\x01")
        with pytest.raises(FileFormatError):
            load_checkpoint(path)
