"""Voxel grid geometry: spatial extent, resolution, indexing.

A GridSpec places a dense grid of cubic voxels in some reference frame
(usually an agent frame). Cells are closed boxes; cell (i,j,k) spans
[origin + idx*res, origin + (idx+1)*res] per axis. Point lookup uses the
floor convention, and points exactly on the upper grid boundary are
out of range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Aabb
from .labels import MAX_LABELS

EXTENT_TOL = 1e-9

# The three benchmark range presets: horizontal range (m) -> voxel size (m).
RANGE_PRESETS = {25.6: 0.1, 51.2: 0.2, 76.8: 0.3}
BENCH_Z_BOUNDS = (-2.0, 2.8)


class GridConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Grid placement: lower corner `origin`, size `extent` (m), cubic voxel
    edge `resolution` (m). Extents must be integer multiples of the
    resolution."""

    origin: tuple[float, float, float]
    extent: tuple[float, float, float]
    resolution: float

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        extent = tuple(float(v) for v in self.extent)
        res = float(self.resolution)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "resolution", res)
        if not np.isfinite(res) or res <= 0:
            raise GridConfigError(f"resolution must be positive, got {res}")
        if not all(np.isfinite(v) for v in origin):
            raise GridConfigError("non-finite grid origin")
        for axis, e in enumerate(extent):
            if not np.isfinite(e) or e <= 0:
                raise GridConfigError(f"extent[{axis}] must be positive, got {e}")
            n = round(e / res)
            if n < 1 or abs(e - n * res) > EXTENT_TOL:
                raise GridConfigError(
                    f"extent[{axis}]={e} is not an integer multiple of resolution {res}")

    @classmethod
    def from_bounds(cls, x=(-50.0, 50.0), y=(-50.0, 50.0), z=(-2.0, 5.0),
                    resolution=0.1) -> "GridSpec":
        for name, (lo, hi) in (("x", x), ("y", y), ("z", z)):
            if not hi > lo:
                raise GridConfigError(f"{name} bounds must satisfy lo < hi")
        return cls(origin=(x[0], y[0], z[0]),
                   extent=(x[1] - x[0], y[1] - y[0], z[1] - z[0]),
                   resolution=resolution)

    @classmethod
    def benchmark(cls, range_m: float) -> "GridSpec":
        """One of the three standard evaluation ranges (25.6 / 51.2 / 76.8 m),
        horizontally centered, z in [-2, 2.8]."""
        try:
            res = RANGE_PRESETS[float(range_m)]
        except KeyError:
            raise GridConfigError(
                f"unknown benchmark range {range_m}; expected one of "
                f"{sorted(RANGE_PRESETS)}") from None
        half = float(range_m) / 2.0
        return cls.from_bounds(x=(-half, half), y=(-half, half),
                               z=BENCH_Z_BOUNDS, resolution=res)

    @property
    def shape(self) -> tuple[int, int, int]:
        return grid_shape(self)

    @property
    def num_voxels(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    @property
    def bounds(self):
        o, e = self.origin, self.extent
        return tuple((o[a], o[a] + e[a]) for a in range(3))

    def aabb(self) -> Aabb:
        o = np.asarray(self.origin)
        return Aabb(o, o + np.asarray(self.extent))

    def origin_array(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=np.float64)

    def voxel_centers_axis(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.resolution


def grid_shape(spec: GridSpec) -> tuple[int, int, int]:
    """Voxel counts per axis (extent / resolution)."""
    return tuple(int(round(e / spec.resolution)) for e in spec.extent)


def voxel_aabb(spec: GridSpec, index) -> Aabb:
    """Closed cell box of a voxel index; raises IndexError out of bounds."""
    i, j, k = (int(v) for v in index)
    nx, ny, nz = spec.shape
    if not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
        raise IndexError(f"voxel index {(i, j, k)} outside grid of shape {(nx, ny, nz)}")
    o = spec.origin_array()
    idx = np.array([i, j, k], dtype=np.float64)
    return Aabb(o + idx * spec.resolution, o + (idx + 1.0) * spec.resolution)


def point_to_voxel(spec: GridSpec, point) -> tuple[int, int, int] | None:
    """Voxel containing a point (floor convention), or None when the point
    is outside the grid. Points exactly on the upper boundary are outside."""
    p = np.asarray(point, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite point")
    o = spec.origin_array()
    upper = o + np.asarray(spec.extent)
    if np.any(p < o) or np.any(p >= upper):
        return None
    n = np.asarray(spec.shape)
    idx = np.floor((p - o) / spec.resolution).astype(np.int64)
    idx = np.minimum(np.maximum(idx, 0), n - 1)
    return (int(idx[0]), int(idx[1]), int(idx[2]))


def brute_force_op_count(spec: GridSpec) -> int:
    """Voxel visits an exhaustive per-voxel annotator performs for one frame
    (per-object multipliers are accounted separately)."""
    return spec.num_voxels


@dataclass(eq=False)
class VoxelGrid:
    """Dense semantic voxel grid: uint8 label codes indexed (i,j,k)."""

    spec: GridSpec
    labels: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if arr.shape != self.spec.shape:
            raise ValueError(
                f"label array shape {arr.shape} does not match grid shape {self.spec.shape}")
        if arr.size and arr.max() >= MAX_LABELS:
            raise ValueError(f"label code {int(arr.max())} outside [0, {MAX_LABELS - 1}]")
        self.labels = arr

    @classmethod
    def empty(cls, spec: GridSpec) -> "VoxelGrid":
        return cls(spec, np.zeros(spec.shape, dtype=np.uint8))

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.spec, self.labels.copy())

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.labels))


def specs_compatible(a: GridSpec, b: GridSpec, rel_tol: float = 1e-6) -> bool:
    """Same shape, and origin/resolution equal up to float32 storage noise."""
    if a.shape != b.shape:
        return False
    scale = max(abs(a.resolution), abs(b.resolution))
    if abs(a.resolution - b.resolution) > rel_tol * scale:
        return False
    for va, vb in zip(a.origin, b.origin):
        if abs(va - vb) > rel_tol * max(1.0, abs(va), abs(vb)):
            return False
    return True
