"""Semantic voxel annotation.

The production pipeline has three stages: a top-down trace that records,
per object and per footprint column, the topmost voxel passing the fine
overlap test (the seeds); a per-object breadth-first completion that grows
each seed set over 6-connected neighbors with fine tests; and label
assignment, which resolves multi-object claims deterministically (smaller
volume wins, then lower id). `brute_force_annotate` is the exhaustive
per-voxel oracle the pipeline is validated against.

Stages two and three run per object and are parallelized over objects;
results are independent of the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .grid import GridSpec, VoxelGrid
from .scene import Scene, SceneObject
from .util import resolve_workers

DEFAULT_VOXEL_BUDGET = 20_000_000
_RANGE_EPS = 1e-9
_BATCH = 1 << 16


class ResourceBudgetError(RuntimeError):
    """Raised when the brute-force annotator would visit too many voxels."""


@dataclass
class SeedMap:
    """Per-object impact voxels from the top-down trace (grid indices)."""

    by_object: dict[int, np.ndarray]
    fine_checks: int = 0

    def total_seeds(self) -> int:
        return sum(len(v) for v in self.by_object.values())


@dataclass
class AnnotationStats:
    fine_checks_performed: int = 0
    voxels_visited: int = 0
    voxels_occupied: int = 0
    per_object_occupied: dict[int, int] = field(default_factory=dict)
    wall_time: float = 0.0
    method: str = ""
    backend: str = ""

    def same_counts(self, other: "AnnotationStats") -> bool:
        """Equality ignoring wall time (and provenance strings)."""
        return (self.fine_checks_performed == other.fine_checks_performed
                and self.voxels_visited == other.voxels_visited
                and self.voxels_occupied == other.voxels_occupied
                and self.per_object_occupied == other.per_object_occupied)

    def to_dict(self) -> dict:
        return {
            "fine_checks_performed": self.fine_checks_performed,
            "voxels_visited": self.voxels_visited,
            "voxels_occupied": self.voxels_occupied,
            "per_object_occupied": {str(k): v for k, v in
                                    sorted(self.per_object_occupied.items())},
            "wall_time": self.wall_time,
            "method": self.method,
            "backend": self.backend,
        }


def _kernel_geometry(obj: SceneObject):
    geom = obj.world_geometry()
    if hasattr(geom, "half_extents"):
        return (0, geom.center, geom.half_extents,
                np.ascontiguousarray(geom.rotation))
    tri_mins, tri_maxs = geom.triangle_bounds()
    return (1, geom.vertices, geom.triangles, tri_mins, tri_maxs)


def _object_window(obj: SceneObject, spec: GridSpec):
    """Inclusive voxel index range of the object's world Aabb clipped to the
    grid, or None when the object misses the grid entirely."""
    box = obj.world_aabb()
    o = spec.origin_array()
    res = spec.resolution
    n = spec.shape
    lo = np.empty(3, dtype=np.int64)
    hi = np.empty(3, dtype=np.int64)
    for a in range(3):
        u_lo = (box.min[a] - o[a]) / res
        u_hi = (box.max[a] - o[a]) / res
        lo[a] = max(0, math.ceil(u_lo - 1.0 - _RANGE_EPS))
        hi[a] = min(n[a] - 1, math.floor(u_hi + _RANGE_EPS))
        if lo[a] > hi[a]:
            return None
    return lo, hi


def top_down_trace(scene: Scene, spec: GridSpec, workers: int | None = None) -> SeedMap:
    """Stage one: for every object and footprint column, descend from the
    top of the object's clipped window; the first fine-test hit seeds the
    column. Objects outside the grid contribute nothing."""
    kern = _kernels.get()
    origin = spec.origin_array()

    def run(obj: SceneObject):
        win = _object_window(obj, spec)
        if win is None:
            return obj.id, np.empty((0, 3), dtype=np.int64), 0
        geom = _kernel_geometry(obj)
        seeds, checks = kern.trace_object(geom, origin, spec.resolution,
                                          win[0], win[1])
        return obj.id, seeds, checks

    results = _map_objects(run, scene.objects, workers)
    by_object = {oid: seeds for oid, seeds, _ in results}
    return SeedMap(by_object, fine_checks=sum(c for _, _, c in results))


def occupancy_completion(scene: Scene, seeds: SeedMap, spec: GridSpec,
                         workers: int | None = None):
    """Stage two: BFS from each object's seeds over 6-connected neighbors,
    fine-testing every candidate at most once per object. Returns
    (per-object occupied index arrays, stats for this stage)."""
    kern = _kernels.get()
    origin = spec.origin_array()
    t0 = time.perf_counter()

    def run(obj: SceneObject):
        seed_arr = seeds.by_object.get(obj.id)
        if seed_arr is None or len(seed_arr) == 0:
            return obj.id, np.empty((0, 3), dtype=np.int64), 0
        win = _object_window(obj, spec)
        if win is None:
            raise ValueError(f"object {obj.id} has seeds but lies outside the grid")
        geom = _kernel_geometry(obj)
        occ, checks = kern.complete_object(geom, origin, spec.resolution,
                                           win[0], win[1], seed_arr)
        return obj.id, occ, checks

    results = _map_objects(run, scene.objects, workers)
    occupied = {oid: occ for oid, occ, _ in results}
    checks = sum(c for _, _, c in results)
    stats = AnnotationStats(
        fine_checks_performed=checks,
        voxels_visited=checks,
        voxels_occupied=0,
        per_object_occupied={oid: len(occ) for oid, occ in occupied.items()},
        wall_time=time.perf_counter() - t0,
        method="completion",
        backend=_kernels.active_name(),
    )
    return occupied, stats


def assign_labels(occupied_sets: dict[int, np.ndarray], scene: Scene,
                  spec: GridSpec) -> VoxelGrid:
    """Stage three: stamp each object's label onto its occupied voxels.
    Conflicts go to the smaller volume_hint, ties to the lower id; the
    result is independent of object order."""
    grid = np.zeros(spec.shape, dtype=np.uint8)
    flat = grid.reshape(-1)
    ny, nz = spec.shape[1], spec.shape[2]
    order = sorted(scene.objects, key=lambda o: (o.volume_hint, o.id))
    for obj in order:
        occ = occupied_sets.get(obj.id)
        if occ is None or len(occ) == 0:
            continue
        lin = (occ[:, 0] * ny + occ[:, 1]) * nz + occ[:, 2]
        free = flat[lin] == 0
        flat[lin[free]] = obj.label
    return VoxelGrid(spec, grid)


def annotate(scene: Scene, spec: GridSpec, workers: int | None = None):
    """Full pipeline. Trace and completion are fused per object with a
    shared fine-test cache, so no voxel is tested twice for one object."""
    kern = _kernels.get()
    origin = spec.origin_array()
    t0 = time.perf_counter()

    def run(obj: SceneObject):
        win = _object_window(obj, spec)
        if win is None:
            return obj.id, np.empty((0, 3), dtype=np.int64), 0
        geom = _kernel_geometry(obj)
        occ, checks = kern.annotate_object(geom, origin, spec.resolution,
                                           win[0], win[1])
        return obj.id, occ, checks

    results = _map_objects(run, scene.objects, workers)
    occupied = {oid: occ for oid, occ, _ in results}
    grid = assign_labels(occupied, scene, spec)
    checks = sum(c for _, _, c in results)
    stats = AnnotationStats(
        fine_checks_performed=checks,
        voxels_visited=checks,
        voxels_occupied=grid.occupied_count,
        per_object_occupied={oid: len(occ) for oid, occ in occupied.items()},
        wall_time=time.perf_counter() - t0,
        method="pipeline",
        backend=_kernels.active_name(),
    )
    return grid, stats


def brute_force_annotate(scene: Scene, spec: GridSpec, workers: int | None = None,
                         voxel_budget: int = DEFAULT_VOXEL_BUDGET,
                         force: bool = False):
    """Exhaustive oracle: every voxel is visited and fine-tested against
    every object whose Aabb overlaps it. `fine_checks_performed` counts one
    detection operation per voxel visit, plus one per additional candidate
    beyond the first, so it always dominates the pipeline's count.

    Refuses grids above `voxel_budget` voxels unless `force` is set."""
    total = spec.num_voxels
    if total > voxel_budget and not force:
        raise ResourceBudgetError(
            f"grid has {total} voxels, above the brute-force budget "
            f"{voxel_budget}; pass force=True to run anyway")
    kern = _kernels.get()
    origin = spec.origin_array()
    res = spec.resolution
    ny, nz = spec.shape[1], spec.shape[2]
    cell = np.array([res, res, res])
    t0 = time.perf_counter()

    def run(obj: SceneObject):
        win = _object_window(obj, spec)
        if win is None:
            return obj.id, np.empty((0, 3), dtype=np.int64), None
        lo, hi = win
        geom = _kernel_geometry(obj)
        counts = hi - lo + 1
        ii, jj, kk = np.meshgrid(
            np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1),
            np.arange(lo[2], hi[2] + 1), indexing="ij")
        cells = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3)
        hits = np.empty(cells.shape[0], dtype=np.uint8)
        for s in range(0, cells.shape[0], _BATCH):
            batch = cells[s:s + _BATCH]
            mins = origin + batch * res
            hits[s:s + _BATCH] = kern.cells_overlap(
                np.ascontiguousarray(mins), cell, geom)
        return obj.id, cells[hits.astype(bool)], (lo, hi, int(np.prod(counts)))

    results = _map_objects(run, scene.objects, workers)
    occupied = {oid: occ for oid, occ, _ in results}
    grid = assign_labels(occupied, scene, spec)

    candidate_counts = np.zeros(spec.shape, dtype=np.uint16)
    for _, _, win in results:
        if win is not None:
            lo, hi, _ = win
            candidate_counts[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1, lo[2]:hi[2] + 1] += 1
    fine = int(np.maximum(candidate_counts, 1, dtype=np.uint16).sum(dtype=np.int64))

    stats = AnnotationStats(
        fine_checks_performed=fine,
        voxels_visited=total,
        voxels_occupied=grid.occupied_count,
        per_object_occupied={oid: len(occ) for oid, occ in occupied.items()},
        wall_time=time.perf_counter() - t0,
        method="brute_force",
        backend=_kernels.active_name(),
    )
    return grid, stats


def _map_objects(fn, objects, workers):
    n = resolve_workers(workers)
    if n <= 1 or len(objects) <= 1:
        return [fn(o) for o in objects]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, objects))
