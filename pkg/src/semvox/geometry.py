"""Geometric primitives and exact overlap tests.

Overlap semantics are closed-set everywhere: boxes or triangles that merely
touch count as overlapping. Mesh occupancy means surface intersection: a
box strictly inside a watertight mesh with no triangle crossing it does NOT
overlap the mesh; use oriented boxes for solid objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

ROTATION_TOL = 1e-6
MIN_TRIANGLE_AREA = 1e-12


def _vec3(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite 3-vector")
    return a


def check_rotation(r, context: str = "rotation") -> np.ndarray:
    """Validate a 3x3 orthonormal matrix with determinant +1."""
    r = np.asarray(r, dtype=np.float64).reshape(3, 3)
    if not np.all(np.isfinite(r)):
        raise ValueError(f"{context}: non-finite entries")
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > ROTATION_TOL:
        raise ValueError(f"{context}: not orthonormal (max deviation {err:.3g})")
    det = float(np.linalg.det(r))
    if abs(det - 1.0) > ROTATION_TOL:
        raise ValueError(f"{context}: determinant {det:.6f} (must be +1)")
    return r


@dataclass(frozen=True, eq=False)
class Aabb:
    """Axis-aligned box [min, max], closed on all faces."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", _vec3(self.min))
        object.__setattr__(self, "max", _vec3(self.max))
        if np.any(self.min > self.max):
            raise ValueError("Aabb min must be <= max componentwise")

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    @property
    def size(self) -> np.ndarray:
        return self.max - self.min

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.min, other.min), np.maximum(self.max, other.max))


@dataclass(frozen=True, eq=False)
class Obb:
    """Oriented box: center, positive half extents, rotation (local->world,
    columns are the box axes)."""

    center: np.ndarray
    half_extents: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center))
        object.__setattr__(self, "half_extents", _vec3(self.half_extents))
        if np.any(self.half_extents <= 0):
            raise ValueError("Obb half extents must be positive")
        object.__setattr__(self, "rotation", check_rotation(self.rotation, "Obb rotation"))

    @property
    def volume(self) -> float:
        return float(8.0 * np.prod(self.half_extents))

    def aabb(self) -> Aabb:
        reach = np.abs(self.rotation) @ self.half_extents
        return Aabb(self.center - reach, self.center + reach)

    def corners(self) -> np.ndarray:
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                         dtype=np.float64)
        return self.center + (signs * self.half_extents) @ self.rotation.T

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "Obb":
        return Obb(rotation @ self.center + translation,
                   self.half_extents, rotation @ self.rotation)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle soup. Triangles must be non-degenerate."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3))
        if not np.all(np.isfinite(v)):
            raise ValueError("TriMesh: non-finite vertex")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("TriMesh: triangle index out of range")
        if t.shape[0] == 0:
            raise ValueError("TriMesh: no triangles")
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
        if np.any(areas <= MIN_TRIANGLE_AREA):
            bad = int(np.argmin(areas))
            raise ValueError(f"TriMesh: degenerate triangle {bad} (area {areas[bad]:.3g})")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def signed_volume(self) -> float:
        """Divergence-theorem volume; exact for closed, outward-oriented meshes."""
        v = self.vertices
        t = self.triangles
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def aabb(self) -> Aabb:
        return Aabb(self.vertices.min(axis=0), self.vertices.max(axis=0))

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "TriMesh":
        return TriMesh(self.vertices @ rotation.T + translation, self.triangles)

    def triangle_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-triangle Aabbs as (mins, maxs), each (T,3)."""
        tv = self.vertices[self.triangles]
        return (np.ascontiguousarray(tv.min(axis=1)),
                np.ascontiguousarray(tv.max(axis=1)))


# ---------------------------------------------------------------------------
# overlap tests
# ---------------------------------------------------------------------------

def aabb_overlap(a: Aabb, b: Aabb) -> bool:
    """Closed-interval overlap on all three axes (touching faces count)."""
    return bool(np.all(a.min <= b.max) and np.all(b.min <= a.max))


def obb_aabb_overlap(o: Obb, b: Aabb) -> bool:
    """Separating-axis test over the 15 candidate axes."""
    kern = _kernels.get()
    out = kern.obb_cells_overlap(b.min.reshape(1, 3), b.size,
                                 o.center, o.half_extents,
                                 np.ascontiguousarray(o.rotation))
    return bool(out[0])


def tri_aabb_overlap(v0, v1, v2, b: Aabb) -> bool:
    """Separating-axis triangle/box test (13 axes), closed convention."""
    kern = _kernels.get()
    out = kern.tri_cells_overlap(b.min.reshape(1, 3), b.size,
                                 _vec3(v0), _vec3(v1), _vec3(v2))
    return bool(out[0])


# ---------------------------------------------------------------------------
# bounding volume hierarchy
# ---------------------------------------------------------------------------

_LEAF_SIZE = 4


@dataclass
class Bvh:
    """Static BVH over primitive Aabbs. Median split on the longest axis,
    leaves hold up to 4 primitives; construction is deterministic for a
    fixed input order."""

    node_min: np.ndarray = field(repr=False)
    node_max: np.ndarray = field(repr=False)
    node_left: np.ndarray = field(repr=False)    # child index or -1 for leaf
    node_right: np.ndarray = field(repr=False)
    node_first: np.ndarray = field(repr=False)   # leaf: offset into prim ids
    node_count: np.ndarray = field(repr=False)
    prim_ids: np.ndarray = field(repr=False)

    @property
    def num_primitives(self) -> int:
        return int(self.prim_ids.size)

    def query(self, probe: Aabb) -> np.ndarray:
        """Ids of primitives whose Aabb overlaps the probe (sorted)."""
        if self.node_min.shape[0] == 0:
            return np.empty(0, dtype=np.int64)
        pmin, pmax = probe.min, probe.max
        hits: list[np.ndarray] = []
        stack = [0]
        while stack:
            n = stack.pop()
            if np.any(self.node_min[n] > pmax) or np.any(self.node_max[n] < pmin):
                continue
            if self.node_left[n] < 0:
                first, count = self.node_first[n], self.node_count[n]
                ids = self.prim_ids[first:first + count]
                bmin = self._prim_min[ids]
                bmax = self._prim_max[ids]
                ok = np.all(bmin <= pmax, axis=1) & np.all(bmax >= pmin, axis=1)
                if ok.any():
                    hits.append(ids[ok])
            else:
                stack.append(int(self.node_right[n]))
                stack.append(int(self.node_left[n]))
        if not hits:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(hits))


def bvh_build(aabbs: list[Aabb] | np.ndarray) -> Bvh:
    """Build a BVH over primitive bounds; primitive ids are list positions."""
    if isinstance(aabbs, np.ndarray):
        mins = np.asarray(aabbs[:, 0], dtype=np.float64)
        maxs = np.asarray(aabbs[:, 1], dtype=np.float64)
    else:
        mins = np.array([a.min for a in aabbs], dtype=np.float64).reshape(-1, 3)
        maxs = np.array([a.max for a in aabbs], dtype=np.float64).reshape(-1, 3)
    n = mins.shape[0]

    node_min, node_max = [], []
    node_left, node_right, node_first, node_count = [], [], [], []
    order: list[np.ndarray] = []

    def new_node():
        node_min.append(None)
        node_max.append(None)
        node_left.append(-1)
        node_right.append(-1)
        node_first.append(0)
        node_count.append(0)
        return len(node_left) - 1

    def build(ids: np.ndarray) -> int:
        node = new_node()
        node_min[node] = mins[ids].min(axis=0)
        node_max[node] = maxs[ids].max(axis=0)
        if ids.size <= _LEAF_SIZE:
            node_first[node] = sum(o.size for o in order)
            node_count[node] = ids.size
            order.append(ids)
            return node
        axis = int(np.argmax(node_max[node] - node_min[node]))
        centroid = 0.5 * (mins[ids, axis] + maxs[ids, axis])
        perm = np.argsort(centroid, kind="stable")
        half = ids.size // 2
        node_left[node] = build(ids[perm[:half]])
        node_right[node] = build(ids[perm[half:]])
        return node

    if n:
        build(np.arange(n, dtype=np.int64))
        prim_ids = np.concatenate(order)
    else:
        prim_ids = np.empty(0, dtype=np.int64)

    bvh = Bvh(
        node_min=np.array(node_min, dtype=np.float64).reshape(-1, 3),
        node_max=np.array(node_max, dtype=np.float64).reshape(-1, 3),
        node_left=np.array(node_left, dtype=np.int64),
        node_right=np.array(node_right, dtype=np.int64),
        node_first=np.array(node_first, dtype=np.int64),
        node_count=np.array(node_count, dtype=np.int64),
        prim_ids=prim_ids,
    )
    bvh._prim_min = mins
    bvh._prim_max = maxs
    return bvh


def bvh_query(bvh: Bvh, probe: Aabb) -> np.ndarray:
    return bvh.query(probe)
