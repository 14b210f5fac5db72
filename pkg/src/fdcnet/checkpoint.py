"""Binary checkpoint container.

Layout (all integers little-endian):

    magic   4 bytes  b"FDCN"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor, sorted by path:
        path_len u16, path utf-8 bytes
        ndim     u8,  ndim * u32 dims
        payload  float64 little-endian, C order

Sorting by path makes the byte stream a pure function of the tensor dict.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FileFormatError

MAGIC = b"FDCN"
VERSION = 1


def save_checkpoint(path, tensors: dict[str, np.ndarray]) -> None:
    blobs = [struct.pack("<4sII", MAGIC, VERSION, len(tensors))]
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        enc = name.encode("utf-8")
        blobs.append(struct.pack("<H", len(enc)))
        blobs.append(enc)
        blobs.append(struct.pack("<B", arr.ndim))
        blobs.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        blobs.append(arr.tobytes())
    Path(path).write_bytes(b"".join(blobs))


def load_checkpoint(path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise FileFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, count = struct.unpack_from("<4sII", raw, 0)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    off = 12
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        try:
            (plen,) = struct.unpack_from("<H", raw, off)
            off += 2
            name = raw[off : off + plen].decode("utf-8")
            off += plen
            (ndim,) = struct.unpack_from("<B", raw, off)
            off += 1
            shape = struct.unpack_from(f"<{ndim}I", raw, off)
            off += 4 * ndim
            n = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(raw, dtype="<f8", count=n, offset=off).reshape(shape)
            off += 8 * n
        except (struct.error, ValueError) as exc:
            raise FileFormatError(f"{path}: truncated tensor record: {exc}") from None
        out[name] = arr.astype(np.float64)
    if off != len(raw):
        raise FileFormatError(f"{path}: {len(raw) - off} trailing bytes")
    return out
