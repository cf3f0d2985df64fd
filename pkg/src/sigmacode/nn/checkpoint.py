"""Versioned binary checkpoint container.

Layout: magic "SGC1", u32 version, u32 header length, JSON header
(tensor names/shapes/byte offsets plus a free-form meta dict), then the
tensor payload as little-endian float64, tensors concatenated in sorted
name order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"SGC1"
VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path, tensors: dict[str, np.ndarray], meta: dict) -> None:
    entries = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        blob = arr.tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset,
                        "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"tensors": entries, "meta": meta}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(raw) < 12 + header_len:
        raise CheckpointError("truncated header")
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt header: {exc}") from exc
    payload = raw[12 + header_len:]
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(payload):
            raise CheckpointError(f"truncated payload for tensor {entry['name']!r}")
        arr = np.frombuffer(payload[start:start + nbytes], dtype="<f8")
        tensors[entry["name"]] = arr.reshape(entry["shape"]).astype(np.float64)
    return tensors, header["meta"]
