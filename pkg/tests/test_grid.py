import numpy as np
import pytest

from semvox import (
    GridConfigError,
    GridSpec,
    VoxelGrid,
    brute_force_op_count,
    grid_shape,
    point_to_voxel,
    voxel_aabb,
)

MASTER = GridSpec.from_bounds(x=(-50, 50), y=(-50, 50), z=(-2, 5), resolution=0.1)


class TestGridShape:
    def test_master_grid(self):
        assert grid_shape(MASTER) == (1000, 1000, 70)

    def test_benchmark_ranges(self):
        assert GridSpec.benchmark(25.6).shape == (256, 256, 48)
        assert GridSpec.benchmark(51.2).shape == (256, 256, 24)
        assert GridSpec.benchmark(76.8).shape == (256, 256, 16)

    def test_short_range_from_extents(self):
        spec = GridSpec(origin=(-12.8, -12.8, -2.0), extent=(25.6, 25.6, 4.8),
                        resolution=0.1)
        assert grid_shape(spec) == (256, 256, 48)

    def test_unit(self):
        assert grid_shape(GridSpec((0, 0, 0), (1, 1, 1), 1.0)) == (1, 1, 1)

    def test_product_is_voxel_count(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = rng.integers(1, 40, 3)
            res = float(rng.uniform(0.05, 2.0))
            spec = GridSpec((0, 0, 0), tuple(n * res), res)
            shape = grid_shape(spec)
            assert tuple(shape) == tuple(n)
            assert spec.num_voxels == int(np.prod(n))

    def test_non_multiple_extent_rejected(self):
        with pytest.raises(GridConfigError):
            GridSpec((0, 0, 0), (1.05, 1.0, 1.0), 0.1)

    def test_bad_resolution_rejected(self):
        with pytest.raises(GridConfigError):
            GridSpec((0, 0, 0), (1, 1, 1), 0.0)

    def test_unknown_benchmark_range(self):
        with pytest.raises(GridConfigError):
            GridSpec.benchmark(30.0)


class TestOpCount:
    def test_reference_cost_figure(self):
        spec = GridSpec(origin=(-50, -50, -2), extent=(100, 100, 4.8), resolution=0.1)
        assert brute_force_op_count(spec) == 48_000_000

    def test_short_range(self):
        spec = GridSpec(origin=(-12.8, -12.8, -2), extent=(25.6, 25.6, 4.8),
                        resolution=0.1)
        assert brute_force_op_count(spec) == 3_145_728

    def test_single_voxel(self):
        assert brute_force_op_count(GridSpec((0, 0, 0), (1, 1, 1), 1.0)) == 1


class TestVoxelIndexing:
    def test_master_origin_cell(self):
        box = voxel_aabb(MASTER, (0, 0, 0))
        np.testing.assert_allclose(box.min, [-50, -50, -2])
        np.testing.assert_allclose(box.max, [-49.9, -49.9, -1.9])

    def test_lower_corner_point(self):
        assert point_to_voxel(MASTER, (-50, -50, -2)) == (0, 0, 0)

    def test_upper_boundary_out_of_range(self):
        spec = GridSpec((0, 0, 0), (4, 4, 4), 0.5)
        assert point_to_voxel(spec, (4.0, 2.0, 2.0)) is None
        assert point_to_voxel(spec, (2.0, 2.0, 4.0)) is None
        assert point_to_voxel(spec, (-0.001, 2, 2)) is None

    def test_interior_boundary_floor_convention(self):
        spec = GridSpec((0, 0, 0), (4, 4, 4), 0.5)
        assert point_to_voxel(spec, (0.5, 0.25, 0.25)) == (1, 0, 0)

    def test_center_round_trip(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            res = float(rng.uniform(0.05, 1.5))
            n = rng.integers(1, 30, 3)
            origin = rng.uniform(-20, 20, 3)
            spec = GridSpec(tuple(origin), tuple(n * res), res)
            for _ in range(20):
                idx = tuple(int(rng.integers(0, k)) for k in n)
                center = voxel_aabb(spec, idx).center
                assert point_to_voxel(spec, center) == idx

    def test_cells_tile_extent(self):
        spec = GridSpec((0, 0, 0), (2, 2, 2), 0.5)
        nx, ny, nz = spec.shape
        first = voxel_aabb(spec, (0, 0, 0))
        last = voxel_aabb(spec, (nx - 1, ny - 1, nz - 1))
        np.testing.assert_allclose(first.min, spec.origin)
        np.testing.assert_allclose(last.max, np.add(spec.origin, spec.extent))
        # adjacent cells share exactly a face
        a = voxel_aabb(spec, (1, 1, 1))
        b = voxel_aabb(spec, (2, 1, 1))
        assert a.max[0] == b.min[0]

    def test_out_of_bounds_index(self):
        spec = GridSpec((0, 0, 0), (1, 1, 1), 1.0)
        with pytest.raises(IndexError):
            voxel_aabb(spec, (1, 0, 0))
        with pytest.raises(IndexError):
            voxel_aabb(spec, (0, -1, 0))


class TestVoxelGrid:
    def test_shape_checked(self):
        spec = GridSpec((0, 0, 0), (2, 2, 2), 1.0)
        with pytest.raises(ValueError):
            VoxelGrid(spec, np.zeros((2, 2, 3), dtype=np.uint8))

    def test_label_range_checked(self):
        spec = GridSpec((0, 0, 0), (2, 2, 2), 1.0)
        arr = np.zeros((2, 2, 2), dtype=np.uint8)
        arr[0, 0, 0] = 99
        with pytest.raises(ValueError):
            VoxelGrid(spec, arr)

    def test_empty_constructor(self):
        g = VoxelGrid.empty(GridSpec((0, 0, 0), (2, 2, 2), 1.0))
        assert g.occupied_count == 0
