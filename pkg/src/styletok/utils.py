"""Small shared helpers: stable seed derivation, hashing, deterministic mode."""

import hashlib
import json
from pathlib import Path

import numpy as np
import torch

from .errors import PreconditionError


def derive_seed(base_seed: int, *keys) -> int:
    """Derive a stable 63-bit seed from a base seed and arbitrary string/int keys.

    Independent of Python's randomized ``hash``; identical inputs give the
    identical seed on every platform and run.
    """
    h = hashlib.sha256()
    h.update(str(int(base_seed)).encode())
    for k in keys:
        h.update(b"/")
        h.update(str(k).encode())
    return int.from_bytes(h.digest()[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng_for(base_seed: int, *keys) -> np.random.Generator:
    """numpy Generator seeded via :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(base_seed, *keys))


def torch_generator(base_seed: int, *keys) -> torch.Generator:
    g = torch.Generator()
    g.manual_seed(derive_seed(base_seed, *keys))
    return g


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_array(arr: np.ndarray) -> str:
    """Hash of an array's raw little-endian bytes plus dtype/shape tag."""
    a = np.ascontiguousarray(arr)
    tag = f"{a.dtype.str}|{a.shape}|".encode()
    return sha256_bytes(tag + a.tobytes())


def state_dict_hashes(state: dict) -> dict:
    """Per-parameter sha256 of a ``name -> tensor/array`` mapping."""
    out = {}
    for name, value in state.items():
        if isinstance(value, torch.Tensor):
            value = value.detach().cpu().numpy()
        out[name] = sha256_array(np.asarray(value))
    return out


def canonical_json(obj) -> str:
    """Deterministic JSON encoding (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def enable_determinism(seed: int) -> None:
    """Seed torch's global state and force deterministic kernels.

    All data-path randomness in this package flows through explicit
    generators; this guards the remaining torch-internal paths
    (parameter init uses the global seed).
    """
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)


def to_float01(image: np.ndarray) -> np.ndarray:
    """Coerce an image array to float32 in [0, 1] (uint8 or float input)."""
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        return arr.astype(np.float32) / 255.0
    arr = arr.astype(np.float32)
    if not np.isfinite(arr).all():
        raise PreconditionError("image contains non-finite pixel values")
    return arr
