# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Mirrors `semvox._kernels.pure` function for function with identical
arithmetic (same expressions, same evaluation order), so both backends
return identical results. Heavy loops release the GIL; per-object calls
can therefore run concurrently from a thread pool.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, floor, sqrt

cnp.import_array()

COMPILED = True


# ---------------------------------------------------------------------------
# scalar SAT tests
# ---------------------------------------------------------------------------

cdef inline double _min3(double a, double b, double c) noexcept nogil:
    cdef double m = a
    if b < m:
        m = b
    if c < m:
        m = c
    return m


cdef inline double _max3(double a, double b, double c) noexcept nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    return m


cdef bint _obb_cell(const double* ctr, const double* half, const double* rot,
                    double mx, double my, double mz,
                    double cx, double cy, double cz) noexcept nogil:
    cdef double hb[3]
    cdef double d[3]
    cdef double ra, rb, proj, lx, ly, lz, dj, u0, u1, u2
    cdef int a, i, j
    hb[0] = 0.5 * cx
    hb[1] = 0.5 * cy
    hb[2] = 0.5 * cz
    d[0] = ctr[0] - (mx + hb[0])
    d[1] = ctr[1] - (my + hb[1])
    d[2] = ctr[2] - (mz + hb[2])

    for a in range(3):
        ra = half[0] * fabs(rot[3 * a + 0]) + half[1] * fabs(rot[3 * a + 1]) \
             + half[2] * fabs(rot[3 * a + 2])
        if fabs(d[a]) > ra + hb[a]:
            return 0

    for i in range(3):
        proj = d[0] * rot[0 * 3 + i] + d[1] * rot[1 * 3 + i] + d[2] * rot[2 * 3 + i]
        rb = hb[0] * fabs(rot[0 * 3 + i]) + hb[1] * fabs(rot[1 * 3 + i]) \
             + hb[2] * fabs(rot[2 * 3 + i])
        if fabs(proj) > half[i] + rb:
            return 0

    for a in range(3):
        for i in range(3):
            u0 = rot[0 * 3 + i]
            u1 = rot[1 * 3 + i]
            u2 = rot[2 * 3 + i]
            if a == 0:
                lx = 0.0; ly = -u2; lz = u1
            elif a == 1:
                lx = u2; ly = 0.0; lz = -u0
            else:
                lx = -u1; ly = u0; lz = 0.0
            proj = d[0] * lx + d[1] * ly + d[2] * lz
            rb = hb[0] * fabs(lx) + hb[1] * fabs(ly) + hb[2] * fabs(lz)
            ra = 0.0
            for j in range(3):
                dj = rot[0 * 3 + j] * lx + rot[1 * 3 + j] * ly + rot[2 * 3 + j] * lz
                ra += half[j] * fabs(dj)
            if fabs(proj) > ra + rb:
                return 0
    return 1


cdef bint _tri_cell(const double* v0, const double* v1, const double* v2,
                    double mx, double my, double mz,
                    double cx, double cy, double cz) noexcept nogil:
    cdef double hb[3]
    cdef double w0[3]
    cdef double w1[3]
    cdef double w2[3]
    cdef double f[3][3]
    cdef double bc0, bc1, bc2
    cdef double nx, ny, nz, s, r
    cdef double fx, fy, fz, lx, ly, lz, p0, p1, p2, rr, pmin, pmax
    cdef int a, e
    hb[0] = 0.5 * cx
    hb[1] = 0.5 * cy
    hb[2] = 0.5 * cz
    bc0 = mx + hb[0]
    bc1 = my + hb[1]
    bc2 = mz + hb[2]
    w0[0] = v0[0] - bc0; w0[1] = v0[1] - bc1; w0[2] = v0[2] - bc2
    w1[0] = v1[0] - bc0; w1[1] = v1[1] - bc1; w1[2] = v1[2] - bc2
    w2[0] = v2[0] - bc0; w2[1] = v2[1] - bc1; w2[2] = v2[2] - bc2

    for a in range(3):
        if _min3(w0[a], w1[a], w2[a]) > hb[a]:
            return 0
        if _max3(w0[a], w1[a], w2[a]) < -hb[a]:
            return 0

    f[0][0] = v1[0] - v0[0]; f[0][1] = v1[1] - v0[1]; f[0][2] = v1[2] - v0[2]
    f[1][0] = v2[0] - v1[0]; f[1][1] = v2[1] - v1[1]; f[1][2] = v2[2] - v1[2]
    f[2][0] = v0[0] - v2[0]; f[2][1] = v0[1] - v2[1]; f[2][2] = v0[2] - v2[2]

    nx = f[0][1] * f[1][2] - f[0][2] * f[1][1]
    ny = f[0][2] * f[1][0] - f[0][0] * f[1][2]
    nz = f[0][0] * f[1][1] - f[0][1] * f[1][0]
    s = w0[0] * nx + w0[1] * ny + w0[2] * nz
    r = hb[0] * fabs(nx) + hb[1] * fabs(ny) + hb[2] * fabs(nz)
    if fabs(s) > r:
        return 0

    for a in range(3):
        for e in range(3):
            fx = f[e][0]
            fy = f[e][1]
            fz = f[e][2]
            if a == 0:
                lx = 0.0; ly = -fz; lz = fy
            elif a == 1:
                lx = fz; ly = 0.0; lz = -fx
            else:
                lx = -fy; ly = fx; lz = 0.0
            p0 = w0[0] * lx + w0[1] * ly + w0[2] * lz
            p1 = w1[0] * lx + w1[1] * ly + w1[2] * lz
            p2 = w2[0] * lx + w2[1] * ly + w2[2] * lz
            rr = hb[0] * fabs(lx) + hb[1] * fabs(ly) + hb[2] * fabs(lz)
            pmin = _min3(p0, p1, p2)
            pmax = _max3(p0, p1, p2)
            if pmin > rr or pmax < -rr:
                return 0
    return 1


cdef bint _mesh_cell(const double* verts, const int* tris,
                     const double* tmins, const double* tmaxs, Py_ssize_t ntris,
                     double mx, double my, double mz,
                     double cx, double cy, double cz) noexcept nogil:
    cdef Py_ssize_t t
    cdef int ia, ib, ic
    for t in range(ntris):
        if mx > tmaxs[3 * t + 0] or my > tmaxs[3 * t + 1] or mz > tmaxs[3 * t + 2]:
            continue
        if mx + cx < tmins[3 * t + 0] or my + cy < tmins[3 * t + 1] \
                or mz + cz < tmins[3 * t + 2]:
            continue
        ia = tris[3 * t + 0]
        ib = tris[3 * t + 1]
        ic = tris[3 * t + 2]
        if _tri_cell(verts + 3 * ia, verts + 3 * ib, verts + 3 * ic,
                     mx, my, mz, cx, cy, cz):
            return 1
    return 0


cdef bint _fine(int kind,
                const double* ctr, const double* half, const double* rot,
                const double* verts, const int* tris,
                const double* tmins, const double* tmaxs, Py_ssize_t ntris,
                double mx, double my, double mz,
                double cx, double cy, double cz) noexcept nogil:
    if kind == 0:
        return _obb_cell(ctr, half, rot, mx, my, mz, cx, cy, cz)
    return _mesh_cell(verts, tris, tmins, tmaxs, ntris, mx, my, mz, cx, cy, cz)


# ---------------------------------------------------------------------------
# geometry unpacking
# ---------------------------------------------------------------------------

cdef struct GeomC:
    int kind
    const double* ctr
    const double* half
    const double* rot
    const double* verts
    const int* tris
    const double* tmins
    const double* tmaxs
    Py_ssize_t ntris


cdef object _unpack(geom, GeomC* g):
    """Fill the C-side geometry view; returns the arrays to keep alive."""
    cdef cnp.ndarray a0, a1, a2, a3
    g.kind = geom[0]
    if g.kind == 0:
        a0 = np.ascontiguousarray(geom[1], dtype=np.float64)
        a1 = np.ascontiguousarray(geom[2], dtype=np.float64)
        a2 = np.ascontiguousarray(geom[3], dtype=np.float64)
        g.ctr = <const double*> cnp.PyArray_DATA(a0)
        g.half = <const double*> cnp.PyArray_DATA(a1)
        g.rot = <const double*> cnp.PyArray_DATA(a2)
        g.verts = NULL
        g.tris = NULL
        g.tmins = NULL
        g.tmaxs = NULL
        g.ntris = 0
        return (a0, a1, a2)
    a0 = np.ascontiguousarray(geom[1], dtype=np.float64)
    a1 = np.ascontiguousarray(geom[2], dtype=np.int32)
    a2 = np.ascontiguousarray(geom[3], dtype=np.float64)
    a3 = np.ascontiguousarray(geom[4], dtype=np.float64)
    g.verts = <const double*> cnp.PyArray_DATA(a0)
    g.tris = <const int*> cnp.PyArray_DATA(a1)
    g.tmins = <const double*> cnp.PyArray_DATA(a2)
    g.tmaxs = <const double*> cnp.PyArray_DATA(a3)
    g.ntris = a1.shape[0]
    g.ctr = NULL
    g.half = NULL
    g.rot = NULL
    return (a0, a1, a2, a3)


# ---------------------------------------------------------------------------
# batch overlap entry points
# ---------------------------------------------------------------------------

def obb_cells_overlap(mins, cell, center, half, rot):
    cdef double[:, ::1] m = np.ascontiguousarray(mins, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(cell, dtype=np.float64)
    out_arr = np.empty(m.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef GeomC g
    keep = _unpack((0, center, half, rot), &g)
    cdef Py_ssize_t i, n = m.shape[0]
    cdef double cx = c[0], cy = c[1], cz = c[2]
    with nogil:
        for i in range(n):
            out[i] = _obb_cell(g.ctr, g.half, g.rot,
                               m[i, 0], m[i, 1], m[i, 2], cx, cy, cz)
    return out_arr


def tri_cells_overlap(mins, cell, v0, v1, v2):
    cdef double[:, ::1] m = np.ascontiguousarray(mins, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(cell, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(v0, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(v1, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(v2, dtype=np.float64)
    out_arr = np.empty(m.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, n = m.shape[0]
    cdef double cx = c[0], cy = c[1], cz = c[2]
    with nogil:
        for i in range(n):
            out[i] = _tri_cell(&a[0], &b[0], &d[0],
                               m[i, 0], m[i, 1], m[i, 2], cx, cy, cz)
    return out_arr


def mesh_cells_overlap(mins, cell, verts, tris, tri_mins, tri_maxs):
    cdef double[:, ::1] m = np.ascontiguousarray(mins, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(cell, dtype=np.float64)
    out_arr = np.empty(m.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef GeomC g
    keep = _unpack((1, verts, tris, tri_mins, tri_maxs), &g)
    cdef Py_ssize_t i, n = m.shape[0]
    cdef double cx = c[0], cy = c[1], cz = c[2]
    with nogil:
        for i in range(n):
            out[i] = _mesh_cell(g.verts, g.tris, g.tmins, g.tmaxs, g.ntris,
                                m[i, 0], m[i, 1], m[i, 2], cx, cy, cz)
    return out_arr


def cells_overlap(mins, cell, geom):
    if geom[0] == 0:
        return obb_cells_overlap(mins, cell, geom[1], geom[2], geom[3])
    return mesh_cells_overlap(mins, cell, geom[1], geom[2], geom[3], geom[4])


# ---------------------------------------------------------------------------
# trace / BFS completion
# ---------------------------------------------------------------------------

cdef long long _run_trace(const GeomC* g, const double* origin, double res,
                          const long long* lo, long long wx, long long wy, long long wz,
                          unsigned char* tested, long long* queue,
                          long long* n_seeds, long long* checks) noexcept nogil:
    cdef long long wi, wj, wk, flat
    cdef double mx, my, mz
    cdef bint hit
    n_seeds[0] = 0
    for wi in range(wx):
        for wj in range(wy):
            for wk in range(wz - 1, -1, -1):
                mx = origin[0] + <double> (lo[0] + wi) * res
                my = origin[1] + <double> (lo[1] + wj) * res
                mz = origin[2] + <double> (lo[2] + wk) * res
                hit = _fine(g.kind, g.ctr, g.half, g.rot, g.verts, g.tris,
                            g.tmins, g.tmaxs, g.ntris, mx, my, mz, res, res, res)
                checks[0] += 1
                flat = (wi * wy + wj) * wz + wk
                if hit:
                    tested[flat] = 1
                    queue[n_seeds[0]] = flat
                    n_seeds[0] += 1
                    break
                tested[flat] = 2
    return 0


cdef long long _run_bfs(const GeomC* g, const double* origin, double res,
                        const long long* lo, long long wx, long long wy, long long wz,
                        unsigned char* tested, long long* queue,
                        long long head, long long tail,
                        long long* checks) noexcept nogil:
    cdef long long u, wi, wj, wk, ni, nj, nk, flat, rem
    cdef double mx, my, mz
    cdef int d
    cdef bint hit
    while head < tail:
        u = queue[head]
        head += 1
        wi = u // (wy * wz)
        rem = u % (wy * wz)
        wj = rem // wz
        wk = rem % wz
        for d in range(6):
            ni = wi; nj = wj; nk = wk
            if d == 0:
                ni += 1
            elif d == 1:
                ni -= 1
            elif d == 2:
                nj += 1
            elif d == 3:
                nj -= 1
            elif d == 4:
                nk += 1
            else:
                nk -= 1
            if ni < 0 or ni >= wx or nj < 0 or nj >= wy or nk < 0 or nk >= wz:
                continue
            flat = (ni * wy + nj) * wz + nk
            if tested[flat] != 0:
                continue
            mx = origin[0] + <double> (lo[0] + ni) * res
            my = origin[1] + <double> (lo[1] + nj) * res
            mz = origin[2] + <double> (lo[2] + nk) * res
            hit = _fine(g.kind, g.ctr, g.half, g.rot, g.verts, g.tris,
                        g.tmins, g.tmaxs, g.ntris, mx, my, mz, res, res, res)
            checks[0] += 1
            if hit:
                tested[flat] = 1
                queue[tail] = flat
                tail += 1
            else:
                tested[flat] = 2
    return tail


cdef _collect(unsigned char* tested, const long long* lo,
              long long wx, long long wy, long long wz):
    cdef long long f, count = 0, wprod = wx * wy * wz
    for f in range(wprod):
        if tested[f] == 1:
            count += 1
    out_arr = np.empty((count, 3), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef long long idx = 0, rem
    for f in range(wprod):
        if tested[f] == 1:
            out[idx, 0] = f // (wy * wz) + lo[0]
            rem = f % (wy * wz)
            out[idx, 1] = rem // wz + lo[1]
            out[idx, 2] = rem % wz + lo[2]
            idx += 1
    return out_arr


cdef _window(lo_in, hi_in, long long* lo, long long* hi):
    cdef cnp.ndarray l = np.ascontiguousarray(lo_in, dtype=np.int64)
    cdef cnp.ndarray h = np.ascontiguousarray(hi_in, dtype=np.int64)
    cdef long long* lp = <long long*> cnp.PyArray_DATA(l)
    cdef long long* hp = <long long*> cnp.PyArray_DATA(h)
    cdef int a
    for a in range(3):
        lo[a] = lp[a]
        hi[a] = hp[a]


def trace_object(geom, origin, res, lo_in, hi_in):
    cdef GeomC g
    keep = _unpack(geom, &g)
    cdef cnp.ndarray o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef const double* op = <const double*> cnp.PyArray_DATA(o)
    cdef long long lo[3]
    cdef long long hi[3]
    _window(lo_in, hi_in, lo, hi)
    cdef long long wx = hi[0] - lo[0] + 1, wy = hi[1] - lo[1] + 1, wz = hi[2] - lo[2] + 1
    tested_arr = np.zeros(wx * wy * wz, dtype=np.uint8)
    queue_arr = np.empty(wx * wy * wz, dtype=np.int64)
    cdef unsigned char[::1] tested = tested_arr
    cdef long long[::1] queue = queue_arr
    cdef long long n_seeds = 0, checks = 0
    cdef double r = res
    with nogil:
        _run_trace(&g, op, r, lo, wx, wy, wz, &tested[0], &queue[0],
                   &n_seeds, &checks)
    seeds = np.empty((n_seeds, 3), dtype=np.int64)
    cdef long long[:, ::1] sv = seeds
    cdef long long i, f, rem
    for i in range(n_seeds):
        f = queue[i]
        sv[i, 0] = f // (wy * wz) + lo[0]
        rem = f % (wy * wz)
        sv[i, 1] = rem // wz + lo[1]
        sv[i, 2] = rem % wz + lo[2]
    return seeds, int(checks)


def complete_object(geom, origin, res, lo_in, hi_in, seeds):
    cdef GeomC g
    keep = _unpack(geom, &g)
    cdef cnp.ndarray o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef const double* op = <const double*> cnp.PyArray_DATA(o)
    cdef long long lo[3]
    cdef long long hi[3]
    _window(lo_in, hi_in, lo, hi)
    cdef long long wx = hi[0] - lo[0] + 1, wy = hi[1] - lo[1] + 1, wz = hi[2] - lo[2] + 1
    cdef long long[:, ::1] s = np.ascontiguousarray(
        np.asarray(seeds, dtype=np.int64).reshape(-1, 3))
    tested_arr = np.zeros(wx * wy * wz, dtype=np.uint8)
    queue_arr = np.empty(wx * wy * wz, dtype=np.int64)
    cdef unsigned char[::1] tested = tested_arr
    cdef long long[::1] queue = queue_arr
    cdef long long i, li, lj, lk, flat, tail = 0, checks = 0
    for i in range(s.shape[0]):
        li = s[i, 0] - lo[0]
        lj = s[i, 1] - lo[1]
        lk = s[i, 2] - lo[2]
        if li < 0 or li >= wx or lj < 0 or lj >= wy or lk < 0 or lk >= wz:
            raise ValueError("seed voxel outside the object's grid window")
        flat = (li * wy + lj) * wz + lk
        if tested[flat] == 0:
            tested[flat] = 1
            queue[tail] = flat
            tail += 1
    cdef double r = res
    with nogil:
        _run_bfs(&g, op, r, lo, wx, wy, wz, &tested[0], &queue[0], 0, tail, &checks)
    return _collect(&tested[0], lo, wx, wy, wz), int(checks)


def annotate_object(geom, origin, res, lo_in, hi_in):
    cdef GeomC g
    keep = _unpack(geom, &g)
    cdef cnp.ndarray o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef const double* op = <const double*> cnp.PyArray_DATA(o)
    cdef long long lo[3]
    cdef long long hi[3]
    _window(lo_in, hi_in, lo, hi)
    cdef long long wx = hi[0] - lo[0] + 1, wy = hi[1] - lo[1] + 1, wz = hi[2] - lo[2] + 1
    tested_arr = np.zeros(wx * wy * wz, dtype=np.uint8)
    queue_arr = np.empty(wx * wy * wz, dtype=np.int64)
    cdef unsigned char[::1] tested = tested_arr
    cdef long long[::1] queue = queue_arr
    cdef long long n_seeds = 0, checks = 0
    cdef double r = res
    with nogil:
        _run_trace(&g, op, r, lo, wx, wy, wz, &tested[0], &queue[0],
                   &n_seeds, &checks)
        _run_bfs(&g, op, r, lo, wx, wy, wz, &tested[0], &queue[0],
                 0, n_seeds, &checks)
    return _collect(&tested[0], lo, wx, wy, wz), int(checks)


# ---------------------------------------------------------------------------
# DDA visibility
# ---------------------------------------------------------------------------

def visibility(labels, origin, res, sensor, fwd_x, fwd_y, use_fov, cos_half_fov,
               max_range, i_lo=0, i_hi=None):
    """Line-of-sight mask for target voxels with i in [i_lo, i_hi); the
    returned array covers just that slab (full grid by default)."""
    cdef unsigned char[:, :, ::1] lab = np.ascontiguousarray(labels, dtype=np.uint8)
    cdef cnp.ndarray o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef cnp.ndarray sn = np.ascontiguousarray(sensor, dtype=np.float64)
    cdef const double* op = <const double*> cnp.PyArray_DATA(o)
    cdef const double* sp = <const double*> cnp.PyArray_DATA(sn)
    cdef long long nx = lab.shape[0], ny = lab.shape[1], nz = lab.shape[2]
    cdef long long ilo = i_lo
    cdef long long ihi = nx if i_hi is None else i_hi
    out_arr = np.zeros((ihi - ilo, ny, nz), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef double r = res, fx = fwd_x, fy = fwd_y, ch = cos_half_fov
    cdef double mr2 = max_range * max_range
    cdef int fov = use_fov
    cdef long long i, j, k
    cdef long long c0, c1, c2, t0, t1, t2, s0, s1, s2, guard, g
    cdef long long cur0_0, cur0_1, cur0_2
    cdef double cx, cy, cz, dx, dy, dz, r2, hn, cosang
    cdef double tmx, tmy, tmz, tdx, tdy, tdz, up
    cdef bint vis, blocked

    cur0_0 = <long long> floor((sp[0] - op[0]) / r)
    cur0_1 = <long long> floor((sp[1] - op[1]) / r)
    cur0_2 = <long long> floor((sp[2] - op[2]) / r)

    with nogil:
        for i in range(ilo, ihi):
            for j in range(ny):
                for k in range(nz):
                    cx = op[0] + (<double> i + 0.5) * r
                    cy = op[1] + (<double> j + 0.5) * r
                    cz = op[2] + (<double> k + 0.5) * r
                    dx = cx - sp[0]
                    dy = cy - sp[1]
                    dz = cz - sp[2]
                    r2 = dx * dx + dy * dy + dz * dz
                    if r2 > mr2:
                        continue
                    if fov:
                        hn = sqrt(dx * dx + dy * dy)
                        if hn > 0.0:
                            cosang = (dx * fx + dy * fy) / hn
                            if cosang < ch:
                                continue

                    c0 = cur0_0; c1 = cur0_1; c2 = cur0_2
                    t0 = i; t1 = j; t2 = k
                    if c0 == t0 and c1 == t1 and c2 == t2:
                        out[i - ilo, j, k] = 1
                        continue
                    s0 = (dx > 0.0) - (dx < 0.0)
                    s1 = (dy > 0.0) - (dy < 0.0)
                    s2 = (dz > 0.0) - (dz < 0.0)
                    if dx != 0.0:
                        up = op[0] + <double> (c0 + (s0 > 0)) * r
                        tmx = (up - sp[0]) / dx
                        tdx = <double> s0 * r / dx
                    else:
                        tmx = INFINITY
                        tdx = INFINITY
                    if dy != 0.0:
                        up = op[1] + <double> (c1 + (s1 > 0)) * r
                        tmy = (up - sp[1]) / dy
                        tdy = <double> s1 * r / dy
                    else:
                        tmy = INFINITY
                        tdy = INFINITY
                    if dz != 0.0:
                        up = op[2] + <double> (c2 + (s2 > 0)) * r
                        tmz = (up - sp[2]) / dz
                        tdz = <double> s2 * r / dz
                    else:
                        tmz = INFINITY
                        tdz = INFINITY

                    guard = (t0 - c0 if t0 >= c0 else c0 - t0) \
                        + (t1 - c1 if t1 >= c1 else c1 - t1) \
                        + (t2 - c2 if t2 >= c2 else c2 - t2) + 3
                    vis = 0
                    for g in range(guard):
                        if tmx <= tmy and tmx <= tmz:
                            c0 += s0
                            tmx += tdx
                        elif tmy <= tmz:
                            c1 += s1
                            tmy += tdy
                        else:
                            c2 += s2
                            tmz += tdz
                        if c0 == t0 and c1 == t1 and c2 == t2:
                            vis = 1
                            break
                        if 0 <= c0 < nx and 0 <= c1 < ny and 0 <= c2 < nz:
                            if lab[c0, c1, c2] != 0:
                                break
                    out[i - ilo, j, k] = vis
    return out_arr
