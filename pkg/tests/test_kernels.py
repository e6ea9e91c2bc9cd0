"""Cross-backend equivalence: the compiled kernels must reproduce the
pure-numpy reference bit for bit, including fine-check counts."""

import math

import numpy as np
import pytest

from semvox import _kernels
from semvox._kernels import pure

from scenegen import box_mesh, rand_rotation, tetra_mesh

pytestmark = pytest.mark.skipif(not _kernels.HAVE_COMPILED,
                                reason="compiled kernels unavailable")


def _obb_geom(rng):
    return (0, rng.uniform(-2, 8, 3), rng.uniform(0.2, 2.0, 3), rand_rotation(rng))


def _mesh_geom(rng):
    base = box_mesh(rng.uniform(0.3, 1.5, 3)) if rng.random() < 0.5 \
        else tetra_mesh(float(rng.uniform(0.5, 2.0)))
    rot = rand_rotation(rng)
    mesh = base.transformed(rot, rng.uniform(0, 6, 3))
    tm, tM = mesh.triangle_bounds()
    return (1, mesh.vertices, mesh.triangles, tm, tM)


class TestBatchOverlapParity:
    def test_obb_batches(self):
        rng = np.random.default_rng(50)
        cell = np.array([0.5, 0.5, 0.5])
        for _ in range(100):
            geom = _obb_geom(rng)
            mins = rng.uniform(-3, 9, (64, 3))
            a = pure.cells_overlap(mins, cell, geom)
            b = _kernels._core.cells_overlap(mins, cell, geom)
            assert np.array_equal(a, b)

    def test_mesh_batches(self):
        rng = np.random.default_rng(51)
        cell = np.array([0.4, 0.4, 0.4])
        for _ in range(60):
            geom = _mesh_geom(rng)
            mins = rng.uniform(-1, 7, (64, 3))
            a = pure.cells_overlap(mins, cell, geom)
            b = _kernels._core.cells_overlap(mins, cell, geom)
            assert np.array_equal(a, b)

    def test_single_triangle(self):
        rng = np.random.default_rng(52)
        cell = np.array([0.7, 0.7, 0.7])
        for _ in range(200):
            v = rng.uniform(-2, 2, (3, 3))
            mins = rng.uniform(-3, 3, (32, 3))
            a = pure.tri_cells_overlap(mins, cell, v[0], v[1], v[2])
            b = _kernels._core.tri_cells_overlap(mins, cell, v[0], v[1], v[2])
            assert np.array_equal(a, b)


class TestObjectKernelsParity:
    @pytest.mark.parametrize("kind", ["obb", "mesh"])
    def test_trace_complete_annotate(self, kind):
        rng = np.random.default_rng(53 if kind == "obb" else 54)
        origin = np.zeros(3)
        res = 0.25
        lo = np.zeros(3, dtype=np.int64)
        hi = np.array([39, 39, 31], dtype=np.int64)
        for _ in range(30):
            geom = _obb_geom(rng) if kind == "obb" else _mesh_geom(rng)
            occ_p, ch_p = pure.annotate_object(geom, origin, res, lo, hi)
            occ_c, ch_c = _kernels._core.annotate_object(geom, origin, res, lo, hi)
            assert np.array_equal(occ_p, occ_c)
            assert ch_p == ch_c

            s_p, tc_p = pure.trace_object(geom, origin, res, lo, hi)
            s_c, tc_c = _kernels._core.trace_object(geom, origin, res, lo, hi)
            assert np.array_equal(s_p, s_c)
            assert tc_p == tc_c

            if len(s_p):
                o_p, c_p = pure.complete_object(geom, origin, res, lo, hi, s_p)
                o_c, c_c = _kernels._core.complete_object(geom, origin, res, lo, hi, s_c)
                assert np.array_equal(o_p, o_c)
                assert c_p == c_c
                assert np.array_equal(o_p, occ_p)


class TestVisibilityParity:
    def test_random_grids(self):
        rng = np.random.default_rng(55)
        for _ in range(15):
            shape = tuple(int(v) for v in rng.integers(6, 24, 3))
            labels = (rng.random(shape) < 0.05).astype(np.uint8) * 9
            origin = rng.uniform(-3, 0, 3)
            res = float(rng.uniform(0.2, 0.6))
            sensor = origin + rng.uniform(0.2, 0.8, 3) * (np.array(shape) * res)
            fov = float(rng.choice([360.0, 180.0, 120.0, 75.0]))
            use_fov = int(fov < 360.0)
            ch = math.cos(math.radians(fov) / 2) if use_fov else -2.0
            theta = rng.uniform(0, 2 * np.pi)
            fx, fy = math.cos(theta), math.sin(theta)
            mr = float(rng.uniform(2.0, 12.0))
            a = pure.visibility(labels, origin, res, sensor, fx, fy, use_fov, ch, mr)
            b = _kernels._core.visibility(labels, origin, res, sensor, fx, fy,
                                          use_fov, ch, mr)
            assert np.array_equal(a, b)

    def test_sensor_outside_grid(self):
        rng = np.random.default_rng(56)
        labels = (rng.random((12, 12, 8)) < 0.08).astype(np.uint8) * 3
        origin = np.zeros(3)
        sensor = np.array([-2.3, 1.7, 0.9])
        a = pure.visibility(labels, origin, 0.5, sensor, 1.0, 0.0, 0, -2.0, 20.0)
        b = _kernels._core.visibility(labels, origin, 0.5, sensor, 1.0, 0.0, 0,
                                      -2.0, 20.0)
        assert np.array_equal(a, b)


class TestBackendSwitching:
    def test_use_context_manager(self):
        before = _kernels.active_name()
        with _kernels.use("pure"):
            assert _kernels.active_name() == "pure"
        assert _kernels.active_name() == before

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            _kernels.set_backend("gpu")
