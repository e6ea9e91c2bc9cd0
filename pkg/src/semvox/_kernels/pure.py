"""Pure-numpy kernels.

Reference implementations of the hot inner loops: batch separating-axis
overlap tests, the top-down trace, BFS occupancy completion, and DDA
visibility. The compiled backend (`semvox._kernels._core`) mirrors these
function-for-function with identical arithmetic, so the two backends
produce identical outputs bit for bit.

All functions take plain ndarrays; cells are axis-aligned boxes given by
their minimum corner plus one shared edge-length vector.
"""

from __future__ import annotations

import numpy as np

COMPILED = False

_NEIGHBOR_OFFSETS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
    dtype=np.int64,
)


# ---------------------------------------------------------------------------
# separating-axis overlap tests
# ---------------------------------------------------------------------------

def obb_cells_overlap(mins, cell, center, half, rot):
    """SAT test of one oriented box against N axis-aligned cells.

    mins: (N,3) cell minimum corners; cell: (3,) shared cell size.
    Returns uint8[N], 1 where the cell overlaps the box (touching counts).
    """
    mins = np.ascontiguousarray(mins, dtype=np.float64)
    n = mins.shape[0]
    hb = 0.5 * np.asarray(cell, dtype=np.float64)
    bc = mins + hb
    d = np.empty((n, 3))
    d[:, 0] = center[0] - bc[:, 0]
    d[:, 1] = center[1] - bc[:, 1]
    d[:, 2] = center[2] - bc[:, 2]

    alive = np.ones(n, dtype=bool)

    # world axes
    for a in range(3):
        ra = half[0] * abs(rot[a, 0]) + half[1] * abs(rot[a, 1]) + half[2] * abs(rot[a, 2])
        alive &= np.abs(d[:, a]) <= ra + hb[a]
        if not alive.any():
            return np.zeros(n, dtype=np.uint8)

    # box axes
    for i in range(3):
        proj = d[:, 0] * rot[0, i] + d[:, 1] * rot[1, i] + d[:, 2] * rot[2, i]
        rb = hb[0] * abs(rot[0, i]) + hb[1] * abs(rot[1, i]) + hb[2] * abs(rot[2, i])
        alive &= np.abs(proj) <= half[i] + rb
        if not alive.any():
            return np.zeros(n, dtype=np.uint8)

    # cross axes e_a x u_i
    for a in range(3):
        for i in range(3):
            u0, u1, u2 = rot[0, i], rot[1, i], rot[2, i]
            if a == 0:
                lx, ly, lz = 0.0, -u2, u1
            elif a == 1:
                lx, ly, lz = u2, 0.0, -u0
            else:
                lx, ly, lz = -u1, u0, 0.0
            proj = d[:, 0] * lx + d[:, 1] * ly + d[:, 2] * lz
            rb = hb[0] * abs(lx) + hb[1] * abs(ly) + hb[2] * abs(lz)
            ra = 0.0
            for j in range(3):
                dj = rot[0, j] * lx + rot[1, j] * ly + rot[2, j] * lz
                ra += half[j] * abs(dj)
            alive &= np.abs(proj) <= ra + rb
            if not alive.any():
                return np.zeros(n, dtype=np.uint8)

    return alive.astype(np.uint8)


def tri_cells_overlap(mins, cell, v0, v1, v2):
    """SAT test of one triangle against N axis-aligned cells (13 axes)."""
    mins = np.ascontiguousarray(mins, dtype=np.float64)
    n = mins.shape[0]
    hb = 0.5 * np.asarray(cell, dtype=np.float64)
    bc = mins + hb

    w = np.empty((3, n, 3))
    for vi, v in enumerate((v0, v1, v2)):
        w[vi, :, 0] = v[0] - bc[:, 0]
        w[vi, :, 1] = v[1] - bc[:, 1]
        w[vi, :, 2] = v[2] - bc[:, 2]

    alive = np.ones(n, dtype=bool)

    # cell face axes
    for a in range(3):
        pa = w[:, :, a]
        alive &= np.minimum(np.minimum(pa[0], pa[1]), pa[2]) <= hb[a]
        alive &= np.maximum(np.maximum(pa[0], pa[1]), pa[2]) >= -hb[a]
        if not alive.any():
            return np.zeros(n, dtype=np.uint8)

    f = (
        (v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2]),
        (v2[0] - v1[0], v2[1] - v1[1], v2[2] - v1[2]),
        (v0[0] - v2[0], v0[1] - v2[1], v0[2] - v2[2]),
    )

    # triangle plane
    nx = f[0][1] * f[1][2] - f[0][2] * f[1][1]
    ny = f[0][2] * f[1][0] - f[0][0] * f[1][2]
    nz = f[0][0] * f[1][1] - f[0][1] * f[1][0]
    s = w[0, :, 0] * nx + w[0, :, 1] * ny + w[0, :, 2] * nz
    r = hb[0] * abs(nx) + hb[1] * abs(ny) + hb[2] * abs(nz)
    alive &= np.abs(s) <= r
    if not alive.any():
        return np.zeros(n, dtype=np.uint8)

    # edge cross axes e_a x f_e
    for a in range(3):
        for e in range(3):
            fx, fy, fz = f[e]
            if a == 0:
                lx, ly, lz = 0.0, -fz, fy
            elif a == 1:
                lx, ly, lz = fz, 0.0, -fx
            else:
                lx, ly, lz = -fy, fx, 0.0
            p0 = w[0, :, 0] * lx + w[0, :, 1] * ly + w[0, :, 2] * lz
            p1 = w[1, :, 0] * lx + w[1, :, 1] * ly + w[1, :, 2] * lz
            p2 = w[2, :, 0] * lx + w[2, :, 1] * ly + w[2, :, 2] * lz
            rr = hb[0] * abs(lx) + hb[1] * abs(ly) + hb[2] * abs(lz)
            pmin = np.minimum(np.minimum(p0, p1), p2)
            pmax = np.maximum(np.maximum(p0, p1), p2)
            alive &= (pmin <= rr) & (pmax >= -rr)
            if not alive.any():
                return np.zeros(n, dtype=np.uint8)

    return alive.astype(np.uint8)


def mesh_cells_overlap(mins, cell, verts, tris, tri_mins, tri_maxs):
    """Any-triangle SAT test of a triangle soup against N cells."""
    mins = np.ascontiguousarray(mins, dtype=np.float64)
    n = mins.shape[0]
    cell = np.asarray(cell, dtype=np.float64)
    maxs = mins + cell
    out = np.zeros(n, dtype=np.uint8)
    undecided = np.ones(n, dtype=bool)
    for t in range(tris.shape[0]):
        cand = undecided & np.all(mins <= tri_maxs[t], axis=1) \
            & np.all(maxs >= tri_mins[t], axis=1)
        idx = np.flatnonzero(cand)
        if idx.size == 0:
            continue
        a, b, c = tris[t]
        hit = tri_cells_overlap(mins[idx], cell, verts[a], verts[b], verts[c]).astype(bool)
        won = idx[hit]
        out[won] = 1
        undecided[won] = False
        if not undecided.any():
            break
    return out


def cells_overlap(mins, cell, geom):
    """Dispatch on a geometry tuple: (0, center, half, rot) for an oriented
    box, (1, verts, tris, tri_mins, tri_maxs) for a mesh."""
    kind = geom[0]
    if kind == 0:
        _, center, half, rot = geom
        return obb_cells_overlap(mins, cell, center, half, rot)
    _, verts, tris, tri_mins, tri_maxs = geom
    return mesh_cells_overlap(mins, cell, verts, tris, tri_mins, tri_maxs)


# ---------------------------------------------------------------------------
# top-down trace and BFS occupancy completion
# ---------------------------------------------------------------------------

def _window_cells(origin, res, lo, wijk):
    """Minimum corners of window-local cells given as (M,3) index offsets."""
    return origin + (lo + wijk) * res


def _trace(origin, res, lo, hi, geom, tested):
    """Descend each (i,j) column from the top of the window; first hit seeds.

    Marks every tested cell in `tested` (1 occupied / 2 empty). Returns
    (seeds as window-local (S,3) int64 in column order, checks).
    """
    wx, wy, wz = (hi - lo + 1).astype(np.int64)
    cols = np.stack(
        np.meshgrid(np.arange(wx), np.arange(wy), indexing="ij"), axis=-1
    ).reshape(-1, 2)
    active = np.arange(cols.shape[0])
    seed_flags = np.zeros(cols.shape[0], dtype=bool)
    seed_k = np.zeros(cols.shape[0], dtype=np.int64)
    checks = 0
    for k in range(wz - 1, -1, -1):
        if active.size == 0:
            break
        wijk = np.concatenate(
            [cols[active], np.full((active.size, 1), k, dtype=np.int64)], axis=1
        )
        hit = cells_overlap(_window_cells(origin, res, lo, wijk),
                            np.array([res, res, res]), geom).astype(bool)
        checks += active.size
        flat = (wijk[:, 0] * wy + wijk[:, 1]) * wz + wijk[:, 2]
        tested[flat[hit]] = 1
        tested[flat[~hit]] = 2
        seed_flags[active[hit]] = True
        seed_k[active[hit]] = k
        active = active[~hit]
    which = np.flatnonzero(seed_flags)
    seeds = np.concatenate([cols[which], seed_k[which, None]], axis=1)
    return seeds, checks


def _bfs(origin, res, lo, hi, geom, tested, frontier):
    """Expand 6-connected occupancy from an occupied frontier.

    `tested` caches fine-test results (0 unknown / 1 occupied / 2 empty);
    cells already tested are never re-tested. Returns checks performed.
    """
    wx, wy, wz = (hi - lo + 1).astype(np.int64)
    shape = np.array([wx, wy, wz], dtype=np.int64)
    cellv = np.array([res, res, res])
    checks = 0
    while frontier.shape[0]:
        nb = (frontier[:, None, :] + _NEIGHBOR_OFFSETS[None, :, :]).reshape(-1, 3)
        ok = np.all((nb >= 0) & (nb < shape), axis=1)
        nb = nb[ok]
        if nb.shape[0] == 0:
            break
        flat = (nb[:, 0] * wy + nb[:, 1]) * wz + nb[:, 2]
        flat = np.unique(flat)
        flat = flat[tested[flat] == 0]
        if flat.size == 0:
            break
        wijk = np.stack(np.unravel_index(flat, (wx, wy, wz)), axis=1)
        hit = cells_overlap(_window_cells(origin, res, lo, wijk), cellv, geom).astype(bool)
        checks += flat.size
        tested[flat[hit]] = 1
        tested[flat[~hit]] = 2
        frontier = wijk[hit]
    return checks


def _collect_occupied(tested, lo, hi):
    wx, wy, wz = (hi - lo + 1).astype(np.int64)
    flat = np.flatnonzero(tested == 1)
    wijk = np.stack(np.unravel_index(flat, (wx, wy, wz)), axis=1)
    return wijk + lo


def _prep(lo, hi):
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    wprod = int(np.prod(hi - lo + 1))
    return lo, hi, np.zeros(wprod, dtype=np.uint8)


def trace_object(geom, origin, res, lo, hi):
    """Top-down trace over the clipped object window; returns grid-index
    seeds (one per column with a hit, topmost) and the fine-check count."""
    lo, hi, tested = _prep(lo, hi)
    origin = np.asarray(origin, dtype=np.float64)
    seeds, checks = _trace(origin, float(res), lo, hi, geom, tested)
    return seeds + lo, checks


def complete_object(geom, origin, res, lo, hi, seeds):
    """BFS completion from trusted seed voxels (seeds are not re-tested)."""
    lo, hi, tested = _prep(lo, hi)
    origin = np.asarray(origin, dtype=np.float64)
    seeds = np.asarray(seeds, dtype=np.int64).reshape(-1, 3)
    local = seeds - lo
    shape = hi - lo + 1
    if local.size and (np.any(local < 0) or np.any(local >= shape)):
        raise ValueError("seed voxel outside the object's grid window")
    wy, wz = int(shape[1]), int(shape[2])
    tested[(local[:, 0] * wy + local[:, 1]) * wz + local[:, 2]] = 1
    checks = _bfs(origin, float(res), lo, hi, geom, tested, local)
    return _collect_occupied(tested, lo, hi), checks


def annotate_object(geom, origin, res, lo, hi):
    """Fused trace + BFS with a shared fine-test cache, so no cell is
    tested twice across the two stages."""
    lo, hi, tested = _prep(lo, hi)
    origin = np.asarray(origin, dtype=np.float64)
    seeds, checks = _trace(origin, float(res), lo, hi, geom, tested)
    checks += _bfs(origin, float(res), lo, hi, geom, tested, seeds)
    return _collect_occupied(tested, lo, hi), checks


# ---------------------------------------------------------------------------
# DDA visibility
# ---------------------------------------------------------------------------

_RAY_CHUNK = 1 << 18


def visibility(labels, origin, res, sensor, fwd_x, fwd_y, use_fov, cos_half_fov,
               max_range, i_lo=0, i_hi=None):
    """Per-voxel line-of-sight mask for targets with i in [i_lo, i_hi)
    (full grid by default); the returned array covers just that slab.

    A voxel is visible when its center is within range and horizontal FOV
    of the sensor and the grid ray from the sensor to the center crosses
    no occupied cell strictly before the target (the sensor's own cell is
    transparent; the target itself may be occupied).
    """
    nx, ny, nz = labels.shape
    if i_hi is None:
        i_hi = nx
    origin = np.asarray(origin, dtype=np.float64)
    res = float(res)
    out = np.zeros((i_hi - i_lo, ny, nz), dtype=np.uint8)

    idx = np.stack(
        np.meshgrid(np.arange(i_lo, i_hi), np.arange(ny), np.arange(nz),
                    indexing="ij"),
        axis=-1,
    ).reshape(-1, 3)
    centers = origin + (idx + 0.5) * res
    d = centers - np.asarray(sensor, dtype=np.float64)
    r2 = d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2
    keep = r2 <= max_range * max_range
    if use_fov:
        hn = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        cosang = np.where(hn > 0.0, (d[:, 0] * fwd_x + d[:, 1] * fwd_y) / np.where(hn > 0.0, hn, 1.0), 1.0)
        keep &= cosang >= cos_half_fov
    cand = np.flatnonzero(keep)

    cur0 = np.floor((np.asarray(sensor, dtype=np.float64) - origin) / res).astype(np.int64)
    flat_vis = out.reshape(-1)
    for start in range(0, cand.size, _RAY_CHUNK):
        sel = cand[start:start + _RAY_CHUNK]
        flat_vis[sel] = _trace_rays(labels, origin, res,
                                    np.asarray(sensor, dtype=np.float64),
                                    cur0, idx[sel], d[sel])
    return out


def _trace_rays(labels, origin, res, sensor, cur0, tgt, d):
    n = tgt.shape[0]
    cur = np.broadcast_to(cur0, (n, 3)).copy()
    step = np.sign(d).astype(np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = origin + (cur + (step > 0)) * res
        tmax = np.where(d != 0.0, (upper - sensor) / d, np.inf)
        tdelta = np.where(d != 0.0, step * res / d, np.inf)

    visible = np.zeros(n, dtype=np.uint8)
    active = np.flatnonzero(~np.all(cur == tgt, axis=1))
    visible[np.all(cur == tgt, axis=1)] = 1

    guard = int(np.abs(tgt - cur).sum(axis=1).max(initial=0)) + 3
    shape = np.array(labels.shape, dtype=np.int64)
    flat_labels = labels.reshape(-1)
    for _ in range(guard):
        if active.size == 0:
            break
        axis = np.argmin(tmax[active], axis=1)
        rows = active
        cur[rows, axis] += step[rows, axis]
        tmax[rows, axis] += tdelta[rows, axis]

        reached = np.all(cur[rows] == tgt[rows], axis=1)
        visible[rows[reached]] = 1

        live = rows[~reached]
        c = cur[live]
        inb = np.all((c >= 0) & (c < shape), axis=1)
        blocked = np.zeros(live.size, dtype=bool)
        if inb.any():
            li = live[inb]
            ci = cur[li]
            occ = flat_labels[(ci[:, 0] * shape[1] + ci[:, 1]) * shape[2] + ci[:, 2]] != 0
            blocked[inb] = occ
        active = live[~blocked]
    return visible
