"""Voxel-grid transformations.

Label grids are categorical, so rigid alignment uses inverse warping with
nearest-voxel sampling and a validity mask; downsampling takes the majority
non-empty label per block (occupied always beats empty, keeping thin
structures alive at coarse resolutions); visibility casts one grid ray per
voxel center.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels
from .grid import GridSpec, VoxelGrid
from .labels import EMPTY
from .scene import Agent, RigidTransform
from .util import resolve_workers


def relative_transform(ego: RigidTransform, other: RigidTransform) -> RigidTransform:
    """Transform mapping points in `other`'s frame into `ego`'s frame."""
    return ego.inverse() @ other


def warp_indices(src_spec: GridSpec, t: RigidTransform, dst_spec: GridSpec):
    """Inverse-warp index map: for each destination voxel center p, the
    source voxel containing t^-1(p). Returns (flat source indices with 0
    placeholders, valid mask), both shaped like the destination grid.

    Sample coordinates are built per axis with broadcasting: q = R^T(p - t)
    expands to rank-1 outer sums, avoiding any (N,3) intermediates."""
    axes = tuple(dst_spec.voxel_centers_axis(a) for a in range(3))
    r, tt = t.rotation, t.translation
    so = src_spec.origin
    ext = src_spec.extent
    sn = src_spec.shape
    res = src_spec.resolution

    valid = None
    flat = None
    for a in range(3):
        off = r[0, a] * tt[0] + r[1, a] * tt[1] + r[2, a] * tt[2]
        qa = ((r[0, a] * axes[0])[:, None, None]
              + (r[1, a] * axes[1])[None, :, None]
              + (r[2, a] * axes[2])[None, None, :])
        qa -= off
        va = (qa >= so[a]) & (qa < so[a] + ext[a])
        valid = va if valid is None else (valid & va)
        ia = np.floor((qa - so[a]) / res).astype(np.int64)
        np.clip(ia, 0, sn[a] - 1, out=ia)
        flat = ia if flat is None else (flat * sn[a] + ia)
    flat[~valid] = 0
    return flat, valid


def warp_grid(src: VoxelGrid, t: RigidTransform, dst_spec: GridSpec):
    """Resample a label grid into a destination spec under a rigid
    transform (source frame -> destination frame). Voxels whose sample
    point falls outside the source grid are masked false and set empty."""
    flat, mask = warp_indices(src.spec, t, dst_spec)
    labels = src.labels.reshape(-1)[flat.reshape(-1)].reshape(dst_spec.shape)
    labels[~mask] = EMPTY
    return VoxelGrid(dst_spec, labels), mask


def warp_mask(src_mask: np.ndarray, src_spec: GridSpec, t: RigidTransform,
              dst_spec: GridSpec) -> np.ndarray:
    """Warp a boolean per-voxel mask; out-of-bounds samples become False."""
    flat, valid = warp_indices(src_spec, t, dst_spec)
    out = src_mask.reshape(-1)[flat.reshape(-1)].reshape(dst_spec.shape).copy()
    out &= valid
    return out


def downsample(grid: VoxelGrid, factor) -> VoxelGrid:
    """Reduce resolution by an integer factor. Each coarse voxel takes the
    majority label among its non-empty subvoxels (ties to the lower code);
    a block with any occupied subvoxel is never empty."""
    if np.ndim(factor) == 0:
        f = (int(factor),) * 3
    else:
        f = tuple(int(v) for v in factor)
    if len(f) != 3 or any(v < 1 for v in f):
        raise ValueError(f"factor must be a positive integer (per axis), got {factor}")
    if f[0] != f[1] or f[1] != f[2]:
        raise ValueError("per-axis factors must be equal (voxels stay cubic)")
    shape = grid.spec.shape
    if any(shape[a] % f[a] for a in range(3)):
        raise ValueError(f"grid shape {shape} not divisible by factor {f}")
    if f == (1, 1, 1):
        return grid.copy()

    out_spec = GridSpec(grid.spec.origin,
                        grid.spec.extent,
                        grid.spec.resolution * f[0])
    cx, cy, cz = out_spec.shape
    labels = grid.labels
    n_codes = 24
    out = np.zeros((cx, cy, cz), dtype=np.uint8)

    # per coarse-z slab to bound the count buffer
    for zc in range(cz):
        slab = labels[:, :, zc * f[2]:(zc + 1) * f[2]]
        blocks = slab.reshape(cx, f[0], cy, f[1], f[2])
        blocks = blocks.transpose(0, 2, 1, 3, 4).reshape(cx * cy, -1)
        counts = np.zeros((cx * cy, n_codes), dtype=np.int32)
        rows = np.repeat(np.arange(cx * cy), blocks.shape[1])
        np.add.at(counts, (rows, blocks.reshape(-1)), 1)
        occupied = counts[:, 1:]
        winner = occupied.argmax(axis=1).astype(np.uint8) + 1
        winner[occupied.max(axis=1) == 0] = EMPTY
        out[:, :, zc] = winner.reshape(cx, cy)
    return VoxelGrid(out_spec, out)


def crop_to_range(grid: VoxelGrid, dst_spec: GridSpec) -> VoxelGrid:
    """Index-aligned sub-array copy; the destination region must sit inside
    the source grid at the same resolution."""
    src = grid.spec
    scale = max(src.resolution, dst_spec.resolution)
    if abs(src.resolution - dst_spec.resolution) > 1e-6 * scale:
        raise ValueError(
            f"resolution mismatch: {src.resolution} vs {dst_spec.resolution}")
    res = src.resolution
    start = []
    for a in range(3):
        off = (dst_spec.origin[a] - src.origin[a]) / res
        i0 = round(off)
        if abs(off - i0) > 1e-6:
            raise ValueError(
                f"axis {a}: destination origin not voxel-aligned with source "
                f"(offset {off} cells)")
        if i0 < 0 or i0 + dst_spec.shape[a] > src.shape[a]:
            raise ValueError(f"axis {a}: destination region outside source grid")
        start.append(int(i0))
    nx, ny, nz = dst_spec.shape
    sub = grid.labels[start[0]:start[0] + nx,
                      start[1]:start[1] + ny,
                      start[2]:start[2] + nz]
    return VoxelGrid(dst_spec, sub.copy())


def compute_visibility(gt: VoxelGrid, agent: Agent,
                       workers: int | None = None) -> np.ndarray:
    """Line-of-sight mask for an agent whose pose maps its local frame into
    the grid's frame. A voxel is visible when its center lies within range
    and horizontal FOV and the ray from the sensor first reaches it before
    crossing any occupied voxel (the sensor's own cell is transparent).

    Rays are independent, so the grid is split into slabs across worker
    threads; the result does not depend on the worker count."""
    sensor = agent.pose.apply(agent.sensor_origin)
    forward = agent.pose.rotation[:, 0]
    fx, fy = float(forward[0]), float(forward[1])
    hn = math.hypot(fx, fy)
    use_fov = agent.fov_deg < 360.0 and hn > 1e-12
    if use_fov:
        fx, fy = fx / hn, fy / hn
        cos_half = math.cos(math.radians(agent.fov_deg) / 2.0)
    else:
        fx, fy, cos_half = 1.0, 0.0, -2.0
    kern = _kernels.get()
    labels = np.ascontiguousarray(gt.labels)
    args = (labels, gt.spec.origin_array(), gt.spec.resolution,
            np.asarray(sensor, dtype=np.float64), fx, fy, int(use_fov),
            cos_half, float(agent.max_range))
    nx = labels.shape[0]
    n_workers = min(resolve_workers(workers), max(1, nx // 8))
    if n_workers <= 1 or not getattr(kern, "COMPILED", False):
        return kern.visibility(*args).astype(bool)
    n_slabs = min(nx, n_workers * 6)   # oversubscribe: ray cost is uneven
    edges = np.linspace(0, nx, n_slabs + 1).astype(int)
    out = np.empty(labels.shape, dtype=np.uint8)

    def run(slab):
        lo, hi = slab
        out[lo:hi] = kern.visibility(*args, i_lo=int(lo), i_hi=int(hi))

    with ThreadPoolExecutor(max_workers=n_workers) as ex:
        list(ex.map(run, zip(edges[:-1], edges[1:])))
    return out.astype(bool)


def observed_grid(gt: VoxelGrid, vis: np.ndarray):
    """Single-agent observation: visible voxels keep their labels, the rest
    become empty. Returns (grid, observed mask == vis)."""
    if vis.shape != gt.labels.shape:
        raise ValueError(f"mask shape {vis.shape} != grid shape {gt.labels.shape}")
    labels = np.where(vis, gt.labels, np.uint8(EMPTY)).astype(np.uint8)
    return VoxelGrid(gt.spec, labels), vis.astype(bool).copy()
