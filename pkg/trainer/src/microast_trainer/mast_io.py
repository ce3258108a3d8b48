"""Reader/writer for the engine's .mast weight container.

Implements the wire format documented in the engine README: "MAST"
magic, u32 version, length-prefixed compact JSON manifest with sorted
keys, 64-byte-aligned little-endian float32 blobs, trailing CRC32 over
the data region. Writing is temp-file-plus-rename so a checkpoint is
never observed half-written.
"""
from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path

import numpy as np

from .slots import ChannelPlan, weight_slots

MAGIC = b"MAST"
VERSION = 1
ALIGN = 64


class ContainerError(Exception):
    """Structurally invalid container or checksum failure."""


class SchemaError(Exception):
    """Tensor names/shapes do not match the engine architecture."""


def _align_up(n: int) -> int:
    return (n + ALIGN - 1) // ALIGN * ALIGN


def validate_schema(tensors: dict[str, np.ndarray], plan: ChannelPlan) -> None:
    expected = dict(weight_slots(plan))
    missing = [n for n in expected if n not in tensors]
    extra = [n for n in tensors if n not in expected]
    if missing or extra:
        raise SchemaError(f"slot mismatch: missing={missing[:3]} extra={extra[:3]}")
    for name, shape in expected.items():
        if tuple(tensors[name].shape) != shape:
            raise SchemaError(
                f"{name}: shape {tuple(tensors[name].shape)} != expected {shape}"
            )


def write_mast(tensors: dict[str, np.ndarray], path: str | Path, plan: ChannelPlan) -> None:
    """Write tensors (canonical slot order enforced) to a .mast file."""
    validate_schema(tensors, plan)
    names = [n for n, _ in weight_slots(plan)]
    blobs = [
        np.ascontiguousarray(tensors[n], dtype=np.float32).astype("<f4", copy=False).tobytes()
        for n in names
    ]
    rel = []
    cursor = 0
    for blob in blobs:
        rel.append(cursor)
        cursor = _align_up(cursor + len(blob))
    data_end = rel[-1] + len(blobs[-1])

    data_start = 0
    for _ in range(8):
        entries = [
            {
                "name": n,
                "dtype": "f32",
                "shape": list(tensors[n].shape),
                "offset": data_start + r,
                "nbytes": len(b),
            }
            for n, r, b in zip(names, rel, blobs)
        ]
        manifest = json.dumps(entries, sort_keys=True, separators=(",", ":")).encode()
        start = _align_up(12 + len(manifest))
        if start == data_start:
            break
        data_start = start
    else:
        raise RuntimeError("manifest layout did not converge")

    data = bytearray(data_end)
    for r, blob in zip(rel, blobs):
        data[r : r + len(blob)] = blob

    out = bytearray()
    out += MAGIC
    out += struct.pack("<II", VERSION, len(manifest))
    out += manifest
    out += b"\x00" * (data_start - len(out))
    out += data
    out += struct.pack("<I", zlib.crc32(bytes(data)) & 0xFFFFFFFF)

    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(bytes(out))
    os.replace(tmp, path)


def read_mast(path: str | Path) -> dict[str, np.ndarray]:
    """Read a .mast file back into {name: float32 array}."""
    buf = Path(path).read_bytes()
    if len(buf) < 16 or buf[:4] != MAGIC:
        raise ContainerError(f"{path}: not a .mast container")
    version, mlen = struct.unpack_from("<II", buf, 4)
    if version != VERSION:
        raise ContainerError(f"{path}: unsupported version {version}")
    if 12 + mlen + 4 > len(buf):
        raise ContainerError(f"{path}: truncated container")
    entries = json.loads(buf[12 : 12 + mlen].decode())
    data_start = _align_up(12 + mlen)
    crc_offset = len(buf) - 4
    (stored,) = struct.unpack_from("<I", buf, crc_offset)
    if stored != (zlib.crc32(buf[data_start:crc_offset]) & 0xFFFFFFFF):
        raise ContainerError(f"{path}: CRC mismatch")
    return {
        e["name"]: np.frombuffer(buf, "<f4", e["nbytes"] // 4, e["offset"])
        .reshape(e["shape"])
        .copy()
        for e in entries
    }
