import json
import struct

import numpy as np
import pytest

from mhs_scan.errors import ConfigValidationError, FormatError
from mhs_scan.fusion import MixPoolCv
from mhs_scan.module import (
    SsmConfig,
    decode_weights,
    default_config,
    encode_weights,
    init_weights,
    load_weights,
    save_weights,
)
from mhs_scan.module.persistence import HEADER_SIZE, MAGIC

CONFIG = default_config(12, 3, esf=MixPoolCv(), ssm=SsmConfig(state_dim=4))


@pytest.fixture(scope="module")
def weights():
    return init_weights(CONFIG)


def _assert_bitwise_equal(a, b):
    left, right = a.named_arrays(), b.named_arrays()
    assert list(left) == list(right)
    for name in left:
        assert left[name].dtype == np.float64
        assert left[name].tobytes() == right[name].tobytes(), name


def test_round_trip_is_bitwise(tmp_path, weights):
    path = tmp_path / "w.mhsw"
    save_weights(weights, path)
    _assert_bitwise_equal(load_weights(path, CONFIG), weights)


def test_header_layout(weights):
    data = encode_weights(weights)
    assert data[:4] == MAGIC
    assert struct.unpack_from("<I", data, 4)[0] == 1
    length = struct.unpack_from("<Q", data, 8)[0]
    manifest = json.loads(data[HEADER_SIZE:HEADER_SIZE + length].decode("utf-8"))
    assert [entry["name"] for entry in manifest] == list(weights.named_arrays())
    assert manifest[0] == {"name": "head.0.proj", "shape": [4, 12], "storage": "f64"}
    payload = sum(arr.size for arr in weights.named_arrays().values()) * 8
    assert len(data) == HEADER_SIZE + length + payload


def test_encoding_is_deterministic(weights):
    assert encode_weights(weights) == encode_weights(init_weights(CONFIG))


def test_f32_storage_widens_on_load(weights):
    data = encode_weights(weights, storage="f32")
    loaded = decode_weights(data)
    for name, arr in weights.named_arrays().items():
        assert np.array_equal(loaded.named_arrays()[name], arr.astype(np.float32).astype(np.float64))


def test_unknown_storage_rejected(weights):
    with pytest.raises(ValueError):
        encode_weights(weights, storage="f16")


def test_bad_magic(weights):
    data = b"XXXX" + encode_weights(weights)[4:]
    with pytest.raises(FormatError) as exc:
        decode_weights(data)
    assert exc.value.offset == 0


def test_bad_version(weights):
    data = bytearray(encode_weights(weights))
    struct.pack_into("<I", data, 4, 2)
    with pytest.raises(FormatError) as exc:
        decode_weights(bytes(data))
    assert exc.value.offset == 4


@pytest.mark.parametrize("cut", [2, 6, 12, 40])
def test_truncated_header_or_manifest(weights, cut):
    with pytest.raises(FormatError):
        decode_weights(encode_weights(weights)[:cut])


def test_truncated_payload_reports_offset(weights):
    data = encode_weights(weights)
    length = struct.unpack_from("<Q", data, 8)[0]
    with pytest.raises(FormatError) as exc:
        decode_weights(data[:-3])
    assert exc.value.offset >= HEADER_SIZE + length


def test_trailing_bytes_rejected(weights):
    data = encode_weights(weights)
    with pytest.raises(FormatError) as exc:
        decode_weights(data + b"\x00")
    assert exc.value.offset == len(data)


def test_manifest_must_match_schema(weights):
    manifest = json.dumps([{"name": "ln_gamma", "shape": [2], "storage": "f16"}]).encode("utf-8")
    data = MAGIC + struct.pack("<I", 1) + struct.pack("<Q", len(manifest)) + manifest
    with pytest.raises(FormatError) as exc:
        decode_weights(data)
    assert exc.value.offset == HEADER_SIZE


def test_load_against_other_config_names_tensors(tmp_path, weights):
    path = tmp_path / "w.mhsw"
    save_weights(weights, path)
    other = default_config(12, 4, esf=MixPoolCv(), ssm=SsmConfig(state_dim=4))
    with pytest.raises(ConfigValidationError) as exc:
        load_weights(path, other)
    assert any(e.startswith("head.3.proj") for e in exc.value.errors)


def _rewrite_manifest(data, edit):
    length = struct.unpack_from("<Q", data, 8)[0]
    manifest = json.loads(data[HEADER_SIZE:HEADER_SIZE + length].decode("utf-8"))
    edit({entry["name"]: entry for entry in manifest})
    body = json.dumps(manifest).encode("utf-8")
    return data[:8] + struct.pack("<Q", len(body)) + body + data[HEADER_SIZE + length:]


def test_fractional_shape_rejected(weights):
    def edit(entries):
        entries["head.0.proj"]["shape"] = [4.0, 12]

    with pytest.raises(FormatError) as exc:
        decode_weights(_rewrite_manifest(encode_weights(weights), edit))
    assert exc.value.offset == HEADER_SIZE


def test_rank_change_rejected(weights):
    size = weights.mamba[0].W_in.size

    def edit(entries):
        entries["head.0.mamba.W_in"]["shape"] = [size]

    with pytest.raises(FormatError) as exc:
        decode_weights(_rewrite_manifest(encode_weights(weights), edit))
    assert exc.value.offset == HEADER_SIZE
