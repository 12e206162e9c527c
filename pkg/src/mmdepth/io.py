"""
Artifact file formats: 16-bit PGM maps, CSV maps, and binary record dumps.

Every writer here is byte-deterministic: no timestamps, no host names, no
float formatting that depends on locale. Reruns with the same inputs must
produce identical bytes so that map artifacts can be diffed directly.

PGM convention: binary P5, maxval 65535, big-endian samples, one sample per
pixel holding the map value quantized to millimeters. The value 65535 is
reserved as the missing / no-return sentinel (rays that leave the scene,
pixels with +inf); finite values clamp to [0, 65534] mm.
"""

from __future__ import annotations

import struct

import numpy as np

from .waveform import SensingRecord

__all__ = [
    "write_pgm16",
    "read_pgm16",
    "write_map_csv",
    "read_map_csv",
    "write_records",
    "read_records",
]

PGM_SENTINEL = 65535        # missing / no return
_RECORD_MAGIC = b"MMDR"
_RECORD_VERSION = 1


def write_pgm16(path, map_m: np.ndarray) -> None:
    """
    Write a map of meters as a millimeter-quantized 16-bit binary PGM.

    Non-finite entries become the sentinel 65535; finite ones round to the
    nearest millimeter and clamp to [0, 65534].
    """
    arr = np.asarray(map_m, dtype=float)
    if arr.ndim != 2:
        raise ValueError("map must be 2-D")
    mm = np.full(arr.shape, PGM_SENTINEL, dtype=np.uint16)
    finite = np.isfinite(arr)
    mm[finite] = np.clip(np.rint(arr[finite] * 1000.0), 0, PGM_SENTINEL - 1).astype(np.uint16)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(mm.astype(">u2").tobytes())


def read_pgm16(path) -> np.ndarray:
    """Read a PGM written by write_pgm16 back to meters (sentinel -> +inf)."""
    with open(path, "rb") as fh:
        data = fh.read()
    # Header is three whitespace-separated tokens after the magic.
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM file")
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    w, h, maxval = (int(t) for t in tokens)
    if maxval != 65535:
        raise ValueError(f"expected 16-bit PGM (maxval 65535), got {maxval}")
    mm = np.frombuffer(data, dtype=">u2", count=w * h, offset=pos).reshape(h, w)
    out = mm.astype(float) / 1000.0
    out[mm == PGM_SENTINEL] = np.inf
    return out


def write_map_csv(path, map_m: np.ndarray) -> None:
    """
    Write a 2-D map as CSV, one map row per line, full float precision.

    repr() of a Python float round-trips exactly, so the file carries the
    same doubles the array held; +inf serializes as 'inf'.
    """
    arr = np.asarray(map_m, dtype=float)
    if arr.ndim != 2:
        raise ValueError("map must be 2-D")
    with open(path, "w", newline="") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_map_csv(path) -> np.ndarray:
    out = np.loadtxt(path, delimiter=",", ndmin=2)
    return out


def write_records(path, records: list[SensingRecord]) -> None:
    """
    Dump per-beam records to the binary container:

        magic 'MMDR' | uint32 version | uint32 count
        then per record:
        uint32 beam | uint32 n_p | uint32 l_d | (n_p+l_d) x (re, im) float64

    All integers and floats little-endian.
    """
    with open(path, "wb") as fh:
        fh.write(_RECORD_MAGIC)
        fh.write(struct.pack("<II", _RECORD_VERSION, len(records)))
        for rec in records:
            fh.write(struct.pack("<III", rec.beam, rec.n_p, rec.l_d))
            inter = np.empty(2 * len(rec.samples), dtype="<f8")
            inter[0::2] = rec.samples.real
            inter[1::2] = rec.samples.imag
            fh.write(inter.tobytes())


def read_records(path) -> list[SensingRecord]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _RECORD_MAGIC:
        raise ValueError("not a record dump (bad magic)")
    version, count = struct.unpack_from("<II", data, 4)
    if version != _RECORD_VERSION:
        raise ValueError(f"unsupported record dump version {version}")
    pos = 12
    records = []
    for _ in range(count):
        beam, n_p, l_d = struct.unpack_from("<III", data, pos)
        pos += 12
        n = n_p + l_d
        inter = np.frombuffer(data, dtype="<f8", count=2 * n, offset=pos)
        pos += 16 * n
        samples = inter[0::2] + 1j * inter[1::2]
        records.append(SensingRecord(beam=beam, n_p=n_p, l_d=l_d, samples=samples))
    if pos != len(data):
        raise ValueError("trailing bytes after last record")
    return records
