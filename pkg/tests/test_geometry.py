import numpy as np
import pytest
from scipy.optimize import linprog

from semvox import Aabb, Obb, TriMesh, aabb_overlap, bvh_build, bvh_query, obb_aabb_overlap, tri_aabb_overlap

from scenegen import rand_rotation


def lp_obb_aabb(o: Obb, b: Aabb) -> bool:
    """Exact independent overlap oracle: feasibility of the intersection
    polytope as a linear program."""
    rows, rhs = [], []
    for i in range(3):
        u = o.rotation[:, i]
        rows.append(u)
        rhs.append(o.half_extents[i] + float(u @ o.center))
        rows.append(-u)
        rhs.append(o.half_extents[i] - float(u @ o.center))
    res = linprog(np.zeros(3), A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=list(zip(b.min, b.max)), method="highs")
    return res.status == 0


def lp_tri_aabb(v0, v1, v2, b: Aabb) -> bool:
    """Feasibility of a barycentric point of the triangle inside the box."""
    m = np.stack([v0, v1, v2], axis=1)
    a_ub = np.vstack([m, -m])
    b_ub = np.concatenate([b.max, -b.min])
    res = linprog(np.zeros(3), A_ub=a_ub, b_ub=b_ub,
                  A_eq=np.ones((1, 3)), b_eq=[1.0],
                  bounds=[(0, None)] * 3, method="highs")
    return res.status == 0


def obb_sample_points(o: Obb, n_side: int = 22) -> np.ndarray:
    """Dense lattice of points inside the oriented box (~n_side^3 points)."""
    t = np.linspace(-1.0, 1.0, n_side)
    gx, gy, gz = np.meshgrid(t, t, t, indexing="ij")
    local = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3) * o.half_extents
    return o.center + local @ o.rotation.T


def points_in_aabb(points: np.ndarray, b: Aabb) -> np.ndarray:
    return np.all(points >= b.min, axis=1) & np.all(points <= b.max, axis=1)


class TestAabbOverlap:
    def test_basic_overlap(self):
        a = Aabb([0, 0, 0], [1, 1, 1])
        b = Aabb([0.5, 0.5, 0.5], [1.5, 1.5, 1.5])
        assert aabb_overlap(a, b)

    def test_disjoint(self):
        assert not aabb_overlap(Aabb([0, 0, 0], [1, 1, 1]), Aabb([2, 2, 2], [3, 3, 3]))

    def test_shared_face_counts(self):
        assert aabb_overlap(Aabb([0, 0, 0], [1, 1, 1]), Aabb([1, 1, 1], [2, 2, 2]))

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            lo1 = rng.uniform(-2, 2, 3)
            lo2 = rng.uniform(-2, 2, 3)
            a = Aabb(lo1, lo1 + rng.uniform(0, 2, 3))
            b = Aabb(lo2, lo2 + rng.uniform(0, 2, 3))
            assert aabb_overlap(a, b) == aabb_overlap(b, a)

    def test_degenerate_is_point_query(self):
        p = np.array([0.25, 0.5, 0.75])
        probe = Aabb(p, p)
        assert aabb_overlap(probe, Aabb([0, 0, 0], [1, 1, 1]))
        assert not aabb_overlap(probe, Aabb([2, 2, 2], [3, 3, 3]))

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            Aabb([1, 0, 0], [0, 1, 1])


class TestObbAabb:
    def test_identity_equal_boxes(self, backend):
        b = Aabb([0, 0, 0], [1, 1, 1])
        o = Obb([0.5, 0.5, 0.5], [0.5, 0.5, 0.5], np.eye(3))
        assert obb_aabb_overlap(o, b)

    def test_contained(self, backend):
        b = Aabb([0, 0, 0], [4, 4, 4])
        o = Obb([2, 2, 2], [0.3, 0.3, 0.3], rand_rotation(np.random.default_rng(3)))
        assert obb_aabb_overlap(o, b)

    def test_rotated_45_beyond_diagonal(self, backend):
        # sampled-point oracle agrees that the boxes are disjoint
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        reach = 0.5 * np.sqrt(2.0)
        o = Obb([1.0 + reach + 0.01, 0.5, 0.5], [0.5, 0.5, 0.5], rot)
        b = Aabb([0, 0, 0], [1, 1, 1])
        assert not points_in_aabb(obb_sample_points(o), b).any()
        assert not obb_aabb_overlap(o, b)

    def test_against_lp_oracle(self, backend):
        rng = np.random.default_rng(11)
        flips = 0
        for _ in range(400):
            o = Obb(rng.uniform(-1.5, 1.5, 3), rng.uniform(0.1, 1.0, 3),
                    rand_rotation(rng))
            lo = rng.uniform(-1.5, 1.5, 3)
            b = Aabb(lo, lo + rng.uniform(0.1, 1.5, 3))
            sat = obb_aabb_overlap(o, b)
            lp = lp_obb_aabb(o, b)
            if sat != lp:
                # only tolerable within float noise of tangency
                grown = Obb(o.center, o.half_extents + 1e-7, o.rotation)
                shrunk = Obb(o.center, np.maximum(o.half_extents - 1e-7, 1e-9),
                             o.rotation)
                assert obb_aabb_overlap(grown, b) != obb_aabb_overlap(shrunk, b)
                flips += 1
        assert flips <= 2

    def test_sampling_never_beats_sat(self, backend):
        # oracle-positive implies SAT-positive on a large randomized set
        rng = np.random.default_rng(12)
        for _ in range(2000):
            o = Obb(rng.uniform(-1, 1, 3), rng.uniform(0.1, 0.8, 3), rand_rotation(rng))
            lo = rng.uniform(-1, 1, 3)
            b = Aabb(lo, lo + rng.uniform(0.2, 1.2, 3))
            if points_in_aabb(obb_sample_points(o, 8), b).any():
                assert obb_aabb_overlap(o, b)

    def test_touching_face_counts(self, backend):
        b = Aabb([0, 0, 0], [1, 1, 1])
        o = Obb([1.5, 0.5, 0.5], [0.5, 0.5, 0.5], np.eye(3))
        assert obb_aabb_overlap(o, b)

    def test_bad_rotation_rejected(self):
        with pytest.raises(ValueError):
            Obb([0, 0, 0], [1, 1, 1], np.diag([1.0, 1.0, -1.0]))
        with pytest.raises(ValueError):
            Obb([0, 0, 0], [1, 1, 1], np.eye(3) * 2.0)


def tri_sample_points(v0, v1, v2, n: int = 100) -> np.ndarray:
    a = np.linspace(0, 1, n)
    aa, bb = np.meshgrid(a, a, indexing="ij")
    keep = aa + bb <= 1.0
    aa, bb = aa[keep], bb[keep]
    return (np.outer(1 - aa - bb, v0) + np.outer(aa, v1) + np.outer(bb, v2))


class TestTriAabb:
    def test_spanning_triangle(self, backend):
        b = Aabb([0, 0, 0], [1, 1, 1])
        assert tri_aabb_overlap([-1, 0.5, 0.5], [2, -0.2, 0.5], [0.5, 2, 0.6], b)

    def test_coplanar_touching_face(self, backend):
        b = Aabb([0, 0, 0], [1, 1, 1])
        # triangle in the z=1 plane, overlapping the top face
        assert tri_aabb_overlap([0.2, 0.2, 1.0], [0.8, 0.2, 1.0], [0.5, 0.8, 1.0], b)

    def test_far_away(self, backend):
        b = Aabb([0, 0, 0], [1, 1, 1])
        assert not tri_aabb_overlap([3, 3, 3], [4, 3, 3], [3, 4, 3], b)

    def test_against_lp_oracle(self, backend):
        rng = np.random.default_rng(21)
        flips = 0
        for _ in range(400):
            v = rng.uniform(-1.5, 1.5, (3, 3))
            lo = rng.uniform(-1.5, 1.5, 3)
            b = Aabb(lo, lo + rng.uniform(0.2, 1.5, 3))
            sat = tri_aabb_overlap(v[0], v[1], v[2], b)
            lp = lp_tri_aabb(v[0], v[1], v[2], b)
            if sat != lp:
                flips += 1
        assert flips <= 2

    def test_barycentric_sampling_never_beats_sat(self, backend):
        rng = np.random.default_rng(22)
        for _ in range(3000):
            v = rng.uniform(-1.2, 1.2, (3, 3))
            lo = rng.uniform(-1.2, 1.2, 3)
            b = Aabb(lo, lo + rng.uniform(0.2, 1.2, 3))
            pts = tri_sample_points(v[0], v[1], v[2], 25)
            if points_in_aabb(pts, b).any():
                assert tri_aabb_overlap(v[0], v[1], v[2], b)


class TestTriMesh:
    def test_degenerate_triangle_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            TriMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="index"):
            TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])

    def test_signed_volume_of_box(self):
        from scenegen import box_mesh
        m = box_mesh([0.5, 1.0, 2.0])
        assert m.signed_volume == pytest.approx(8 * 0.5 * 1.0 * 2.0, rel=1e-12)


class TestBvh:
    def test_empty(self):
        bvh = bvh_build([])
        assert bvh_query(bvh, Aabb([0, 0, 0], [1, 1, 1])).size == 0

    def test_single_primitive(self):
        bvh = bvh_build([Aabb([0, 0, 0], [1, 1, 1])])
        assert bvh_query(bvh, Aabb([0.5, 0.5, 0.5], [2, 2, 2])).tolist() == [0]
        assert bvh_query(bvh, Aabb([5, 5, 5], [6, 6, 6])).size == 0

    def _random_boxes(self, rng, n):
        lo = rng.uniform(-10, 10, (n, 3))
        return [Aabb(l, l + rng.uniform(0.1, 3.0, 3)) for l in lo]

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(33)
        for scene in range(20):
            boxes = self._random_boxes(rng, int(rng.integers(1, 150)))
            bvh = bvh_build(boxes)
            for _ in range(60):
                lo = rng.uniform(-12, 12, 3)
                probe = Aabb(lo, lo + rng.uniform(0.0, 6.0, 3))
                expect = sorted(i for i, b in enumerate(boxes) if aabb_overlap(b, probe))
                assert bvh_query(bvh, probe).tolist() == expect

    def test_point_probe(self):
        rng = np.random.default_rng(34)
        boxes = self._random_boxes(rng, 80)
        bvh = bvh_build(boxes)
        for _ in range(200):
            p = rng.uniform(-11, 11, 3)
            probe = Aabb(p, p)
            expect = sorted(i for i, b in enumerate(boxes) if aabb_overlap(b, probe))
            assert bvh_query(bvh, probe).tolist() == expect

    def test_children_contained_in_parent(self):
        rng = np.random.default_rng(35)
        boxes = self._random_boxes(rng, 100)
        bvh = bvh_build(boxes)
        for n in range(bvh.node_min.shape[0]):
            left, right = bvh.node_left[n], bvh.node_right[n]
            for child in (left, right):
                if child >= 0:
                    assert np.all(bvh.node_min[n] <= bvh.node_min[child] + 1e-12)
                    assert np.all(bvh.node_max[n] >= bvh.node_max[child] - 1e-12)

    def test_every_primitive_in_exactly_one_leaf(self):
        rng = np.random.default_rng(36)
        boxes = self._random_boxes(rng, 123)
        bvh = bvh_build(boxes)
        assert sorted(bvh.prim_ids.tolist()) == list(range(123))

    def test_deterministic_build(self):
        rng = np.random.default_rng(37)
        boxes = self._random_boxes(rng, 64)
        b1, b2 = bvh_build(boxes), bvh_build(boxes)
        assert np.array_equal(b1.prim_ids, b2.prim_ids)
        assert np.array_equal(b1.node_min, b2.node_min)
