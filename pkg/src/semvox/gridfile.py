"""Binary voxel-grid files.

Fixed little-endian layout with an explicit header:

    magic        4 bytes  b"C3SV"
    version      uint32   (currently 1)
    dims         3x uint32
    resolution_m float32
    origin_m     3x float32
    label_width  uint8    (always 1)
    encoding     uint8    (0 dense, 1 run-length)

The payload is label bytes in x-fastest, then y, then z order. Run-length
payloads are (count: uint32, label: uint8) pairs in canonical form:
adjacent runs never share a label, so identical grids always serialize to
identical bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, VoxelGrid

MAGIC = b"C3SV"
VERSION = 1
ENC_DENSE = 0
ENC_RLE = 1

_HEADER = struct.Struct("<4sI3If3fBB")

_ENCODING_NAMES = {"dense": ENC_DENSE, "rle": ENC_RLE}


class GridFileError(ValueError):
    pass


class BadMagicError(GridFileError):
    pass


class UnsupportedVersionError(GridFileError):
    pass


class TruncatedFileError(GridFileError):
    pass


class PayloadMismatchError(GridFileError):
    pass


class HeaderFieldError(GridFileError):
    pass


def _flat_xfirst(grid: VoxelGrid) -> np.ndarray:
    return grid.labels.reshape(-1, order="F")


def encode_rle(flat: np.ndarray) -> bytes:
    """Canonical run-length encoding of a flat uint8 sequence."""
    if flat.size == 0:
        return b""
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [flat.size]])
    counts = (ends - starts).astype(np.uint64)
    values = flat[starts]
    out = bytearray()
    pack = struct.Struct("<IB").pack
    for count, value in zip(counts.tolist(), values.tolist()):
        while count > 0xFFFFFFFF:
            out += pack(0xFFFFFFFF, value)
            count -= 0xFFFFFFFF
        out += pack(count, value)
    return bytes(out)


def write_grid(grid: VoxelGrid, path: str | Path, encoding: str = "rle") -> None:
    """Serialize a grid. The grid spec's resolution and origin are stored
    as float32, so non-representable values are quantized in the file."""
    try:
        enc = _ENCODING_NAMES[encoding]
    except KeyError:
        raise ValueError(f"unknown encoding {encoding!r}; expected 'dense' or 'rle'") from None
    nx, ny, nz = grid.spec.shape
    header = _HEADER.pack(MAGIC, VERSION, nx, ny, nz,
                          np.float32(grid.spec.resolution),
                          np.float32(grid.spec.origin[0]),
                          np.float32(grid.spec.origin[1]),
                          np.float32(grid.spec.origin[2]),
                          1, enc)
    flat = _flat_xfirst(grid)
    payload = flat.tobytes() if enc == ENC_DENSE else encode_rle(flat)
    Path(path).write_bytes(header + payload)


def read_grid(path: str | Path) -> VoxelGrid:
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: file shorter than the magic bytes")
    if raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {raw[:4]!r} (expected {MAGIC!r})")
    if len(raw) < _HEADER.size:
        raise TruncatedFileError(f"{path}: truncated header "
                                 f"({len(raw)} bytes, need {_HEADER.size})")
    (_, version, nx, ny, nz, res, ox, oy, oz,
     label_width, enc) = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version} (supported: {VERSION})")
    if label_width != 1:
        raise HeaderFieldError(f"{path}: label width {label_width} (supported: 1)")
    if enc not in (ENC_DENSE, ENC_RLE):
        raise HeaderFieldError(f"{path}: unknown encoding byte {enc}")
    if min(nx, ny, nz) < 1:
        raise HeaderFieldError(f"{path}: non-positive dims {(nx, ny, nz)}")
    res = float(res)
    if not (np.isfinite(res) and res > 0):
        raise HeaderFieldError(f"{path}: invalid resolution {res}")

    total = nx * ny * nz
    payload = raw[_HEADER.size:]
    if enc == ENC_DENSE:
        if len(payload) < total:
            raise TruncatedFileError(
                f"{path}: dense payload has {len(payload)} bytes, need {total}")
        if len(payload) > total:
            raise PayloadMismatchError(
                f"{path}: dense payload has {len(payload)} bytes for {total} voxels")
        flat = np.frombuffer(payload, dtype=np.uint8)
    else:
        if len(payload) % 5 != 0:
            raise TruncatedFileError(
                f"{path}: run-length payload length {len(payload)} is not a "
                "multiple of 5")
        pairs = np.frombuffer(payload, dtype=np.dtype([("count", "<u4"),
                                                       ("label", "u1")]))
        decoded = int(pairs["count"].sum(dtype=np.int64))
        if decoded != total:
            raise PayloadMismatchError(
                f"{path}: run-length payload decodes {decoded} voxels, "
                f"dims give {total}")
        flat = np.repeat(pairs["label"], pairs["count"])

    spec = GridSpec(origin=(float(ox), float(oy), float(oz)),
                    extent=(nx * res, ny * res, nz * res),
                    resolution=res)
    labels = flat.reshape((nx, ny, nz), order="F")
    return VoxelGrid(spec, np.ascontiguousarray(labels))
