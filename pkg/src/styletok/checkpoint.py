"""Versioned binary checkpoint container.

Layout (little-endian throughout)::

    magic   b"STCK"
    u32     container format version
    u64     header length in bytes
    bytes   header: canonical JSON (sorted keys) describing metadata and,
            per array: dtype, shape, byte offset, byte length
    bytes   raw array payloads, concatenated in header (sorted-name) order

The encoding is fully deterministic: identical arrays and metadata produce
byte-identical files, so freeze contracts and determinism checks can compare
checkpoints by hash.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError, MissingCheckpointError
from .utils import canonical_json, sha256_array

MAGIC = b"STCK"
FORMAT_VERSION = 1


def save_arrays(path: str | Path, arrays: dict, metadata: dict) -> None:
    """Write ``name -> ndarray`` plus JSON-serializable metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = sorted(arrays)
    index = {}
    offset = 0
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        raw = arr.tobytes()
        index[name] = {
            "dtype": arr.dtype.str,
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        }
        blobs.append(raw)
        offset += len(raw)
    header = canonical_json(
        {"format_version": FORMAT_VERSION, "metadata": metadata, "arrays": index}
    ).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for raw in blobs:
            f.write(raw)


def load_arrays(path: str | Path) -> tuple[dict, dict]:
    """Read a container; returns ``(arrays, metadata)``."""
    path = Path(path)
    if not path.exists():
        raise MissingCheckpointError(f"checkpoint not found: {path}")
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise DataError(f"{path} is not a styletok checkpoint (bad magic)")
        (version,) = struct.unpack("<I", f.read(4))
        if version != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported container version {version}")
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode())
        payload = f.read()
    arrays = {}
    for name, info in header["arrays"].items():
        raw = payload[info["offset"] : info["offset"] + info["nbytes"]]
        if len(raw) != info["nbytes"]:
            raise DataError(f"{path}: truncated payload for array '{name}'")
        arr = np.frombuffer(raw, dtype=np.dtype(info["dtype"])).reshape(info["shape"])
        arrays[name] = arr.copy()
    return arrays, header["metadata"]


def checkpoint_hashes(path: str | Path, prefix: str = "") -> dict:
    """sha256 per stored array, optionally restricted to a name prefix."""
    arrays, _ = load_arrays(path)
    return {n: sha256_array(a) for n, a in sorted(arrays.items()) if n.startswith(prefix)}
