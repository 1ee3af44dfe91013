"""Binary segment cache ("PGL1").

Layout, all little-endian::

    offset 0   4 bytes   magic b"PGL1"
    offset 4   uint64    base
    offset 12  uint64    length
    offset 20  ceil(length/8) bytes   primality bitmap, bit i of byte i//8
                                      (least significant bit first) = is_prime[i]
    then       length * uint32        spf table (0 = prime >= 2**32)

Nothing else is stored, so files are portable across machines.
"""
import os
import struct
from pathlib import Path

import numpy as np

from .engine import SieveSegment, build_segment
from .errors import CacheError, CorruptCache

MAGIC = b"PGL1"
_HEADER = struct.Struct("<4sQQ")


def default_cache_dir():
    return Path(os.environ.get("GAPSLAB_CACHE", Path.home() / ".cache" / "gapslab"))


def segment_path(cache_dir, base, length):
    return Path(cache_dir) / f"seg_{base}_{length}.pgl"


def encode_segment(seg):
    bits = np.packbits(seg.is_prime.astype(np.uint8), bitorder="little")
    return (_HEADER.pack(MAGIC, seg.base, seg.length) + bits.tobytes()
            + seg.spf.astype("<u4").tobytes())


def decode_segment(blob):
    if len(blob) < _HEADER.size:
        raise CorruptCache("file shorter than header")
    magic, base, length = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptCache(f"bad magic {magic!r}")
    nbits = (length + 7) // 8
    expected = _HEADER.size + nbits + 4 * length
    if len(blob) != expected:
        raise CorruptCache(f"expected {expected} bytes, found {len(blob)}")
    raw = np.frombuffer(blob, dtype=np.uint8, count=nbits, offset=_HEADER.size)
    flags = np.unpackbits(raw, count=length, bitorder="little").astype(bool)
    spf = np.frombuffer(blob, dtype="<u4", count=length,
                        offset=_HEADER.size + nbits).astype(np.uint32)
    return SieveSegment(base, length, flags, spf)


def write_segment(seg, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(encode_segment(seg))
        tmp.replace(path)
    except OSError as exc:
        raise CacheError(str(exc)) from exc
    return path


def read_segment(path):
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CacheError(str(exc)) from exc
    return decode_segment(blob)


def cache_roundtrip(seg, cache_dir=None):
    path = segment_path(cache_dir or default_cache_dir(), seg.base, seg.length)
    write_segment(seg, path)
    return read_segment(path)


def load_or_build(base, length, cache_dir=None):
    """Read the cached segment if present, else build and store it."""
    path = segment_path(cache_dir or default_cache_dir(), base, length)
    if path.exists():
        return read_segment(path)
    seg = build_segment(base, length)
    write_segment(seg, path)
    return seg
