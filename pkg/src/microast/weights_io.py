"""Portable bit-exact weight container (.mast files).

Layout, all integers little-endian:

    bytes 0..3    magic "MAST"
    bytes 4..7    u32 format version (currently 1)
    bytes 8..11   u32 manifest byte length M
    bytes 12..    manifest: UTF-8 JSON array, one object per tensor with
                  keys {name, dtype, shape, offset, nbytes}, sorted keys,
                  no whitespace, in canonical slot order
    ...           zero padding up to the first 64-byte boundary
    ...           raw little-endian float32 blobs, each starting on a
                  64-byte boundary (zero padding between), at the
                  absolute file offsets named in the manifest
    last 4 bytes  u32 CRC32 of the data region, i.e. every byte from the
                  first blob's 64-aligned start up to the CRC itself

Identical weights serialize to identical bytes on every platform.
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import IntegrityError
from .network import NetworkWeights, infer_plan

MAGIC = b"MAST"
VERSION = 1
ALIGN = 64

_MANIFEST_KEYS = {"name", "dtype", "shape", "offset", "nbytes"}


def _align_up(n: int) -> int:
    return (n + ALIGN - 1) // ALIGN * ALIGN


def _manifest_bytes(entries: list[dict]) -> bytes:
    return json.dumps(entries, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_weights(weights: NetworkWeights, path: str | Path) -> None:
    """Write a .mast container; load_weights(save_weights(w)) is bit-exact."""
    names = list(weights.tensors)
    blobs = [weights.tensors[n].astype("<f4", copy=False).tobytes() for n in names]

    rel = []
    cursor = 0
    for blob in blobs:
        rel.append(cursor)
        cursor = _align_up(cursor + len(blob))
    data_end_rel = rel[-1] + len(blobs[-1]) if blobs else 0

    # Offsets are absolute, so the manifest depends on its own length;
    # iterate until the data-start guess is consistent.
    data_start = 0
    for _ in range(8):
        entries = [
            {
                "name": n,
                "dtype": "f32",
                "shape": list(weights.tensors[n].shape),
                "offset": data_start + r,
                "nbytes": len(b),
            }
            for n, r, b in zip(names, rel, blobs)
        ]
        manifest = _manifest_bytes(entries)
        start = _align_up(12 + len(manifest))
        if start == data_start:
            break
        data_start = start
    else:
        raise RuntimeError("manifest layout did not converge")

    data = bytearray(data_end_rel)
    for r, blob in zip(rel, blobs):
        data[r : r + len(blob)] = blob
    crc = zlib.crc32(bytes(data)) & 0xFFFFFFFF

    out = bytearray()
    out += MAGIC
    out += struct.pack("<II", VERSION, len(manifest))
    out += manifest
    out += b"\x00" * (data_start - len(out))
    out += data
    out += struct.pack("<I", crc)
    Path(path).write_bytes(bytes(out))


def load_weights(path: str | Path) -> NetworkWeights:
    """Read and validate a .mast container.

    Raises OSError for truncated files, IntegrityError for bad
    magic/version/manifest/CRC, SchemaError when the tensors do not
    match the architecture implied by their shapes.
    """
    buf = Path(path).read_bytes()
    if len(buf) < 16:
        raise OSError(f"{path}: truncated container ({len(buf)} bytes)")
    if buf[:4] != MAGIC:
        raise IntegrityError(f"{path}: bad magic {buf[:4]!r}")
    version, mlen = struct.unpack_from("<II", buf, 4)
    if version != VERSION:
        raise IntegrityError(f"{path}: unsupported version {version}")
    if 12 + mlen + 4 > len(buf):
        raise OSError(f"{path}: truncated container (manifest overruns file)")
    try:
        entries = json.loads(buf[12 : 12 + mlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IntegrityError(f"{path}: malformed manifest: {e}") from None
    if not isinstance(entries, list) or not entries:
        raise IntegrityError(f"{path}: manifest must be a non-empty array")

    data_start = _align_up(12 + mlen)
    crc_offset = len(buf) - 4
    prev_end = data_start
    names: set[str] = set()
    for e in entries:
        if not isinstance(e, dict) or set(e) != _MANIFEST_KEYS:
            raise IntegrityError(f"{path}: bad manifest entry {e!r}")
        if e["dtype"] != "f32":
            raise IntegrityError(f"{path}: unsupported dtype {e['dtype']!r}")
        shape = tuple(int(s) for s in e["shape"])
        if any(s < 0 for s in shape):
            raise IntegrityError(f"{path}: negative extent in {e['name']}")
        if e["nbytes"] != 4 * int(np.prod(shape, dtype=np.int64)):
            raise IntegrityError(f"{path}: nbytes mismatch for {e['name']}")
        if e["offset"] % ALIGN != 0 or e["offset"] < prev_end:
            raise IntegrityError(f"{path}: bad offset for {e['name']}")
        if e["offset"] + e["nbytes"] > crc_offset:
            raise OSError(f"{path}: truncated container (blob overruns file)")
        if e["name"] in names:
            raise IntegrityError(f"{path}: duplicate tensor {e['name']!r}")
        names.add(e["name"])
        prev_end = e["offset"] + e["nbytes"]

    (stored_crc,) = struct.unpack_from("<I", buf, crc_offset)
    actual_crc = zlib.crc32(buf[data_start:crc_offset]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise IntegrityError(
            f"{path}: CRC mismatch (stored {stored_crc:#010x}, "
            f"computed {actual_crc:#010x})"
        )

    tensors = {
        e["name"]: np.frombuffer(
            buf, dtype="<f4", count=e["nbytes"] // 4, offset=e["offset"]
        )
        .reshape(tuple(e["shape"]))
        .copy()
        for e in entries
    }
    plan = infer_plan({n: t.shape for n, t in tensors.items()})
    return NetworkWeights(plan, tensors)


def describe(path: str | Path) -> tuple[list[dict], int]:
    """Manifest entries and total parameter count, for inspection."""
    w = load_weights(path)
    entries = [
        {"name": n, "shape": list(t.shape), "params": int(t.size)}
        for n, t in w.tensors.items()
    ]
    return entries, int(sum(t.size for t in w.tensors.values()))
