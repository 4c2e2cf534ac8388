# component_id: weights_container
# kind: runtime_module
# area: module
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Bit-exact binary container for module weights.

"""
Weights container.

Layout (all integers little-endian)::

    0   4   magic b"MHSW"
    4   4   version, uint32 (= 1)
    8   8   manifest length in bytes, uint64
    16  m   UTF-8 JSON manifest: [{"name", "shape", "storage"}, ...]
    16+m    raw IEEE-754 payloads in manifest order, no padding

``storage`` is ``f64`` or ``f32``; loading always widens to float64.
Decoding either returns complete weights or raises :class:`FormatError`
carrying the byte offset where it stopped.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema
import numpy as np

from ..errors import ConfigValidationError, FormatError
from ..schemas import MANIFEST_SCHEMA, load_schema
from .config import MhsConfig
from .weights import MhsWeights, check_weights

LOGGER_NAME = "mhs_scan.module"
logger = logging.getLogger(LOGGER_NAME)

MAGIC = b"MHSW"
VERSION = 1
HEADER_SIZE = 16
STORAGE_DTYPES = {"f64": np.dtype("<f8"), "f32": np.dtype("<f4")}


def encode_weights(weights: MhsWeights, *, storage: str = "f64") -> bytes:
    if storage not in STORAGE_DTYPES:
        raise ValueError(f"storage must be one of {sorted(STORAGE_DTYPES)}, got {storage!r}")
    dtype = STORAGE_DTYPES[storage]
    arrays = weights.named_arrays()
    manifest = [{"name": name, "shape": list(np.shape(arr)), "storage": storage} for name, arr in arrays.items()]
    manifest_bytes = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", VERSION), struct.pack("<Q", len(manifest_bytes)), manifest_bytes]
    chunks += [np.ascontiguousarray(arr, dtype=dtype).tobytes() for arr in arrays.values()]
    return b"".join(chunks)


def _read_manifest(data: bytes) -> List[Dict[str, Any]]:
    if len(data) < 4:
        raise FormatError("truncated before magic", len(data))
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}", 0)
    if len(data) < 8:
        raise FormatError("truncated version field", 4)
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if len(data) < HEADER_SIZE:
        raise FormatError("truncated manifest length field", 8)
    (length,) = struct.unpack_from("<Q", data, 8)
    end = HEADER_SIZE + length
    if len(data) < end:
        raise FormatError(f"manifest of {length} bytes is truncated", HEADER_SIZE)
    try:
        manifest = json.loads(data[HEADER_SIZE:end].decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}", HEADER_SIZE) from exc

    errors = [e.message for e in jsonschema.Draft7Validator(load_schema(MANIFEST_SCHEMA)).iter_errors(manifest)]
    if errors:
        raise FormatError(f"manifest does not match schema: {errors[0]}", HEADER_SIZE)
    names = [entry["name"] for entry in manifest]
    if len(set(names)) != len(names):
        raise FormatError("manifest lists a tensor name twice", HEADER_SIZE)
    return manifest


def decode_weights(data: bytes) -> MhsWeights:
    manifest = _read_manifest(data)
    offset = HEADER_SIZE + struct.unpack_from("<Q", data, 8)[0]
    arrays: Dict[str, np.ndarray] = {}
    for entry in manifest:
        dtype = STORAGE_DTYPES[entry["storage"]]
        if not all(type(d) is int and d >= 0 for d in entry["shape"]):
            raise FormatError(f"shape of {entry['name']!r} is not a list of non-negative integers", HEADER_SIZE)
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if len(data) < offset + nbytes:
            raise FormatError(f"payload of {entry['name']!r} is truncated", offset)
        raw = np.frombuffer(data, dtype=dtype, count=nbytes // dtype.itemsize, offset=offset)
        arrays[entry["name"]] = raw.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after the last payload", offset)
    try:
        return MhsWeights.from_named_arrays(arrays)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"inconsistent tensor set: {exc}", HEADER_SIZE) from exc


def save_weights(weights: MhsWeights, path: Union[str, Path], *, storage: str = "f64") -> None:
    payload = encode_weights(weights, storage=storage)
    Path(path).write_bytes(payload)
    logger.debug("saved %d bytes of weights to %s (%s)", len(payload), path, storage)


def load_weights(path: Union[str, Path], config: Optional[MhsConfig] = None) -> MhsWeights:
    """Load a container; with ``config`` also check every tensor's shape.

    Raises:
        FormatError: malformed container.
        ConfigValidationError: tensors disagree with ``config`` (each named).
    """
    weights = decode_weights(Path(path).read_bytes())
    if config is not None:
        errors = check_weights(weights, config)
        if errors:
            raise ConfigValidationError(errors, source=str(path))
    logger.debug("loaded weights from %s", path)
    return weights


__all__ = [
    "MAGIC",
    "VERSION",
    "HEADER_SIZE",
    "STORAGE_DTYPES",
    "encode_weights",
    "decode_weights",
    "save_weights",
    "load_weights",
]
