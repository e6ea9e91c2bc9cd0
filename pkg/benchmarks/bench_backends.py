"""Compare the compiled kernels against the pure-numpy fallback.

Runs each hot kernel on a standard workload under both backends, checks the
outputs agree exactly, and prints a timing table.

    python benchmarks/bench_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from semvox import Agent, GridSpec, RigidTransform, Scene, SceneObject, annotate
from semvox import _kernels
from semvox.gridops import compute_visibility
from semvox.grid import VoxelGrid

from scenegen import default_agent, rand_rotation, subdivided_box


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_batch_sat(rng, n_cells, repeat):
    center = np.array([2.0, 2.0, 1.0])
    half = np.array([1.5, 1.0, 0.8])
    rot = rand_rotation(rng)
    mins = rng.uniform(-1, 5, (n_cells, 3))
    cell = np.array([0.1, 0.1, 0.1])

    mesh = subdivided_box(half, s=4).transformed(rot, center)
    tm, tM = mesh.triangle_bounds()

    cases = {
        "sat_obb_batch": (0, center, half, rot),
        "sat_mesh_batch": (1, mesh.vertices, mesh.triangles, tm, tM),
    }
    for name, geom in cases.items():
        results = {}
        outputs = {}
        for backend in _kernels.BACKENDS:
            kern = _kernels._resolve(backend)
            results[backend], outputs[backend] = timed(
                lambda k=kern: k.cells_overlap(mins, cell, geom), repeat)
        if len(outputs) == 2:
            assert np.array_equal(outputs["pure"], outputs["compiled"]), name
        yield name, results


def bench_object_bfs(rng, repeat):
    geoms = {
        "bfs_obb": (0, np.array([10.0, 10.0, 3.0]), np.array([6.0, 6.0, 2.0]),
                    rand_rotation(rng)),
    }
    mesh = subdivided_box([4.0, 4.0, 1.5], s=5).transformed(
        rand_rotation(rng), np.array([10.0, 10.0, 3.0]))
    tm, tM = mesh.triangle_bounds()
    geoms["bfs_mesh"] = (1, mesh.vertices, mesh.triangles, tm, tM)

    origin = np.zeros(3)
    res = 0.1
    lo = np.zeros(3, dtype=np.int64)
    hi = np.array([199, 199, 59], dtype=np.int64)
    for name, geom in geoms.items():
        results = {}
        outputs = {}
        for backend in _kernels.BACKENDS:
            kern = _kernels._resolve(backend)
            results[backend], outputs[backend] = timed(
                lambda k=kern: k.annotate_object(geom, origin, res, lo, hi),
                repeat)
        if len(outputs) == 2:
            a, b = outputs["pure"], outputs["compiled"]
            assert np.array_equal(a[0], b[0]) and a[1] == b[1], name
        yield name, results


def bench_visibility(rng, shape, repeat):
    labels = (rng.random(shape) < 0.03).astype(np.uint8) * 9
    spec = GridSpec((0.0, 0.0, 0.0), tuple(np.array(shape) * 0.1), 0.1)
    grid = VoxelGrid(spec, labels)
    agent = Agent(0, RigidTransform.identity(),
                  np.array(shape) * 0.05, 360.0, 10.0)
    results = {}
    outputs = {}
    for backend in _kernels.BACKENDS:
        with _kernels.use(backend):
            results[backend], outputs[backend] = timed(
                lambda: compute_visibility(grid, agent, workers=1), repeat)
    if len(outputs) == 2:
        assert np.array_equal(outputs["pure"], outputs["compiled"])
    yield "visibility_dda", results


def bench_pipeline(rng, repeat):
    spec = GridSpec(origin=(-12.8, -12.8, -2.0), extent=(25.6, 25.6, 4.8),
                    resolution=0.1)
    objects = []
    for i in range(30):
        half = rng.uniform(0.8, 1.6, 3)
        half[2] = min(half[2], 1.2)
        center = [rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-0.5, 0.5)]
        objects.append(SceneObject(
            i, int(rng.integers(1, 17)),
            subdivided_box(half, s=3),
            RigidTransform(rand_rotation(rng), center)))
    scene = Scene(objects, [default_agent()])
    results = {}
    outputs = {}
    for backend in _kernels.BACKENDS:
        with _kernels.use(backend):
            results[backend], outputs[backend] = timed(
                lambda: annotate(scene, spec, workers=1), repeat)
    if len(outputs) == 2:
        assert np.array_equal(outputs["pure"][0].labels,
                              outputs["compiled"][0].labels)
    yield "annotate_pipeline", results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller workloads, single repetition")
    args = parser.parse_args(argv)

    if not _kernels.HAVE_COMPILED:
        print("note: compiled kernels unavailable; timing pure backend only")
    repeat = 1 if args.quick else 3
    n_cells = 50_000 if args.quick else 200_000
    vis_shape = (96, 96, 32) if args.quick else (192, 192, 48)

    rng = np.random.default_rng(0)
    rows = []
    for gen in (bench_batch_sat(rng, n_cells, repeat),
                bench_object_bfs(rng, repeat),
                bench_visibility(rng, vis_shape, repeat),
                bench_pipeline(rng, repeat)):
        rows.extend(gen)

    print(f"{'kernel':<20} {'pure':>10} {'compiled':>10} {'speedup':>9}")
    print("-" * 52)
    for name, res in rows:
        pure_ms = res.get("pure", float("nan")) * 1e3
        if "compiled" in res:
            comp_ms = res["compiled"] * 1e3
            print(f"{name:<20} {pure_ms:>8.1f}ms {comp_ms:>8.1f}ms "
                  f"{pure_ms / comp_ms:>8.1f}x")
        else:
            print(f"{name:<20} {pure_ms:>8.1f}ms {'-':>10} {'-':>9}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
