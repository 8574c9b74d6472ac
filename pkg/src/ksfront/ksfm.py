"""KSFM: a fixed little-endian binary container for one feature matrix.

Layout (28-byte header, then the payload)::

    offset  size  field
    0       4     magic b"KSFM"
    4       2     version (u16, = 1)
    6       1     kind code (u8)
    7       1     reserved (u8, = 0)
    8       4     rows (u32)
    12      4     cols (u32)
    16      4     sample_rate (u32)
    20      4     frame_len_ms (f32)
    24      4     hop_ms (f32)
    28      ...   rows * cols float32, row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import KsfmFormatError
from .features import KINDS, FeatureMatrix

MAGIC = b"KSFM"
VERSION = 1
HEADER = struct.Struct("<4sHBBIIIff")
HEADER_SIZE = HEADER.size
KIND_CODES = {kind: code for code, kind in enumerate(KINDS)}


def encode(m: FeatureMatrix) -> bytes:
    rows, cols = m.data.shape
    header = HEADER.pack(MAGIC, VERSION, KIND_CODES[m.kind], 0, rows, cols, int(m.sample_rate),
                         m.frame_len_ms, m.hop_ms)
    return header + np.ascontiguousarray(m.data, dtype="<f4").tobytes()


def decode(blob: bytes) -> FeatureMatrix:
    if len(blob) < HEADER_SIZE:
        raise KsfmFormatError(f"file of {len(blob)} bytes is shorter than the {HEADER_SIZE}-byte header")
    magic, version, kind_code, _, rows, cols, rate, frame_ms, hop_ms = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise KsfmFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise KsfmFormatError(f"unsupported version {version}")
    if kind_code >= len(KINDS):
        raise KsfmFormatError(f"unknown kind code {kind_code}")
    expected = HEADER_SIZE + rows * cols * 4
    if len(blob) != expected:
        raise KsfmFormatError(f"header promises {expected} bytes, file has {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER_SIZE).reshape(rows, cols)
    return FeatureMatrix(data.astype(np.float64), KINDS[kind_code], float(frame_ms), float(hop_ms), rate)


def write(m: FeatureMatrix, path):
    with open(path, "wb") as fh:
        fh.write(encode(m))


def read(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        return decode(fh.read())


def payload(path) -> bytes:
    """Raw float32 payload bytes of a KSFM file (header stripped)."""
    with open(path, "rb") as fh:
        return fh.read()[HEADER_SIZE:]
