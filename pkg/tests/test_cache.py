import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapslab import cache
from gapslab.engine import build_segment
from gapslab.errors import CacheError, CorruptCache


def test_roundtrip_small(tmp_path):
    seg = build_segment(10, 10)
    back = cache.cache_roundtrip(seg, tmp_path)
    assert back == seg
    assert np.array_equal(back.is_prime, seg.is_prime) and np.array_equal(back.spf, seg.spf)


@settings(max_examples=25)
@given(st.integers(0, 2**33), st.integers(1, 3000))
def test_roundtrip_property(base, length):
    seg = build_segment(base, length)
    assert cache.decode_segment(cache.encode_segment(seg)) == seg


def test_layout_is_bit_exact():
    seg = build_segment(0, 16)
    raw = cache.encode_segment(seg)
    assert raw[:4] == b"PGL1"
    assert struct.unpack("<QQ", raw[4:20]) == (0, 16)
    # primes 2,3,5,7 -> bits 2,3,5,7 of byte 0; 11,13 -> bits 3,5 of byte 1
    assert raw[20:22] == bytes([0b10101100, 0b00101000])
    assert np.frombuffer(raw[22:], dtype="<u4").tolist() == seg.spf.tolist()
    assert len(raw) == 20 + 2 + 16 * 4


def test_truncated_file(tmp_path):
    seg = build_segment(100, 50)
    path = cache.segment_path(tmp_path, 100, 50)
    cache.write_segment(seg, path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(CorruptCache):
        cache.read_segment(path)
    path.write_bytes(data[:10])
    with pytest.raises(CorruptCache):
        cache.read_segment(path)


def test_wrong_magic(tmp_path):
    seg = build_segment(100, 50)
    path = tmp_path / "x.pgl"
    cache.write_segment(seg, path)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(CorruptCache):
        cache.read_segment(path)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(CacheError):
        cache.read_segment(tmp_path / "absent.pgl")


def test_load_or_build_reuses(tmp_path):
    a = cache.load_or_build(1000, 500, tmp_path)
    path = cache.segment_path(tmp_path, 1000, 500)
    assert path.exists()
    assert cache.load_or_build(1000, 500, tmp_path) == a


def test_env_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GAPSLAB_CACHE", str(tmp_path))
    assert cache.default_cache_dir() == tmp_path
    cache.cache_roundtrip(build_segment(0, 10))
    assert cache.segment_path(tmp_path, 0, 10).exists()
