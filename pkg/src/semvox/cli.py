"""Command-line interface.

Subcommands: annotate, oracle-check, visibility, fuse, eval, bench,
downsample. Every failure path prints exactly one diagnostic line to
stderr and exits nonzero. The SEMVOX_WORKERS environment variable selects
the worker-thread count (default: available parallelism).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import _kernels
from .annotate import annotate, brute_force_annotate
from .bench import prepare_observation, run_benchmark
from .fusion import NoiseModel, evaluate, fuse, perturb_transform, select_collaborators
from .grid import GridSpec, VoxelGrid
from .gridops import compute_visibility, downsample, relative_transform
from .gridfile import read_grid, write_grid
from .labels import DEFAULT_REGISTRY
from .sceneio import load_config, load_scene
from .util import canonical_json


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"semvox: {message}", file=sys.stderr)
        raise SystemExit(2)


def _floats_csv(text: str, n: int | None = None):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def parse_int_range(text: str) -> list[int]:
    """'0..6' (inclusive), '0,1,4', or a single integer."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty integer range {text!r}")
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",")]


def parse_float_sweep(text: str) -> list[float]:
    """'start:stop:step' (inclusive stop), a comma list, or one number."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"sweep syntax is start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"sweep step must be positive, got {text!r}")
        n = int(round((stop - start) / step))
        if abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
            raise ValueError(f"sweep {text!r} does not land on its stop value")
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(v) for v in text.split(",")]


def _spec_from_args(args) -> GridSpec:
    ex, ey, ez = _floats_csv(args.extent, 3)
    if args.origin is not None:
        ox, oy, oz = _floats_csv(args.origin, 3)
    else:
        ox, oy, oz = -ex / 2.0, -ey / 2.0, -2.0
    return GridSpec(origin=(ox, oy, oz), extent=(ex, ey, ez), resolution=args.res)


def _parse_classes(text: str | None):
    if text is None:
        return None
    tokens = [t.strip() for t in text.split(",")]
    return tuple(DEFAULT_REGISTRY.resolve(int(t) if t.isdigit() else t)
                 for t in tokens)


def cmd_annotate(args) -> int:
    scene = load_scene(args.scene)
    spec = _spec_from_args(args)
    grid, stats = annotate(scene, spec)
    write_grid(grid, args.out, encoding=args.encoding)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(stats.to_dict()))
    print(f"annotated {grid.occupied_count} voxels over {spec.num_voxels} "
          f"({stats.fine_checks_performed} fine checks, backend {stats.backend})")
    return 0


def cmd_oracle_check(args) -> int:
    scene = load_scene(args.scene)
    spec = _spec_from_args(args)
    grid, stats = annotate(scene, spec)
    oracle, ostats = brute_force_annotate(scene, spec)
    mismatches = int(np.count_nonzero(grid.labels != oracle.labels))
    print(f"mismatch voxels: {mismatches} / {spec.num_voxels}; "
          f"fine checks: pipeline {stats.fine_checks_performed}, "
          f"brute force {ostats.fine_checks_performed}")
    return 0 if mismatches == 0 else 1


def cmd_visibility(args) -> int:
    scene = load_scene(args.scene)
    agent = scene.agent(args.agent)
    grid = read_grid(args.grid)
    vis = compute_visibility(grid, agent)
    mask_grid = VoxelGrid(grid.spec, vis.astype(np.uint8))
    write_grid(mask_grid, args.out, encoding=args.encoding)
    print(f"visible voxels: {int(vis.sum())} / {grid.spec.num_voxels}")
    return 0


def cmd_fuse(args) -> int:
    scene = load_scene(args.scene)
    ego = scene.agent(args.ego)
    rspec = GridSpec.benchmark(args.range)
    master = GridSpec(rspec.origin, rspec.extent, 0.1)
    noise = NoiseModel(mu=args.mu, sigma=args.sigma, seed=args.seed)
    rng = np.random.default_rng(args.seed)

    gt_e, obs_e, mask_e = prepare_observation(scene, ego, rspec, master)
    entries = []
    for nb in select_collaborators(ego, scene.agents, args.k):
        t = perturb_transform(relative_transform(ego.pose, nb.pose), noise, rng)
        _, obs_n, mask_n = prepare_observation(scene, nb, rspec, master)
        entries.append((obs_n, mask_n, t))
    fused = fuse((obs_e, mask_e), entries, gt_e.spec)
    write_grid(fused, args.out, encoding=args.encoding)
    print(f"fused {len(entries)} collaborators; "
          f"non-empty voxels: {fused.occupied_count}")
    return 0


def cmd_eval(args) -> int:
    pred = read_grid(args.pred)
    gt = read_grid(args.gt)
    classes = _parse_classes(args.classes)
    report = evaluate(pred, gt, classes) if classes else evaluate(pred, gt)
    doc = report.to_dict(DEFAULT_REGISTRY)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(doc))
    print(f"miou: {report.miou:.6f} over {len(report.per_class_iou)} classes")
    return 0


def cmd_bench(args) -> int:
    scene = load_scene(args.scene)
    cfg = load_config(args.config) if args.config else None
    ranges = ([float(v) for v in args.ranges.split(",")] if args.ranges
              else (cfg.ranges if cfg else [25.6, 51.2, 76.8]))
    k_values = (parse_int_range(args.k) if args.k
                else (cfg.k_values if cfg else [0, 1]))
    mu_values = (parse_float_sweep(args.mu) if args.mu
                 else (cfg.mu_values if cfg else [0.0]))
    sigma = args.sigma if args.sigma is not None else (cfg.sigma if cfg else 0.0)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    derive = cfg.derive if cfg else "downsample"
    egos = cfg.egos if cfg else None
    classes = cfg.classes if cfg else None

    range_specs = [GridSpec.benchmark(r) for r in ranges]
    half = max(ranges) / 2.0
    master = GridSpec.from_bounds(x=(-half, half), y=(-half, half),
                                  z=GridSpec.benchmark(max(ranges)).bounds[2],
                                  resolution=0.1)
    noise_models = [NoiseModel(mu=m, sigma=sigma, seed=seed) for m in mu_values]
    kwargs = dict(seed=seed, egos=egos, derive=derive)
    if classes:
        kwargs["classes"] = classes
    result = run_benchmark(scene, master, range_specs, k_values, noise_models,
                           **kwargs)
    paths = result.write(args.out)
    print(f"wrote {len(result.records)} cells to {paths['report']}")
    return 0


def cmd_downsample(args) -> int:
    grid = read_grid(args.infile)
    try:
        factor = [int(v) for v in args.factor.split(",")]
    except ValueError:
        raise ValueError(f"factor must be an integer or triple, got {args.factor!r}") from None
    out = downsample(grid, factor[0] if len(factor) == 1 else factor)
    write_grid(out, args.out, encoding=args.encoding)
    print(f"downsampled {grid.spec.shape} -> {out.spec.shape}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semvox",
                description="semantic voxel annotation and fusion benchmarks "
                            f"(kernels: {_kernels.active_name()})")
    sub = p.add_subparsers(dest="command", required=True)

    def add_encoding(sp):
        sp.add_argument("--encoding", choices=["rle", "dense"], default="rle",
                        help="grid file encoding (default rle)")

    sp = sub.add_parser("annotate", help="run the annotation pipeline")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--extent", required=True, metavar="X,Y,Z",
                    help="grid size in meters; x/y centered, z starts at -2")
    sp.add_argument("--res", required=True, type=float)
    sp.add_argument("--origin", metavar="X0,Y0,Z0",
                    help="override the grid lower corner "
                         "(use --origin=-50,-50,-2 for negatives)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--stats", help="write annotation stats JSON here")
    add_encoding(sp)
    sp.set_defaults(fn=cmd_annotate)

    sp = sub.add_parser("oracle-check",
                        help="diff the pipeline against the brute-force oracle")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--extent", required=True, metavar="X,Y,Z")
    sp.add_argument("--res", required=True, type=float)
    sp.add_argument("--origin", metavar="X0,Y0,Z0")
    sp.set_defaults(fn=cmd_oracle_check)

    sp = sub.add_parser("visibility", help="line-of-sight mask for one agent")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--agent", required=True, type=int)
    sp.add_argument("--out", required=True)
    add_encoding(sp)
    sp.set_defaults(fn=cmd_visibility)

    sp = sub.add_parser("fuse", help="fuse collaborator observations into the ego frame")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--ego", required=True, type=int)
    sp.add_argument("--k", required=True, type=int)
    sp.add_argument("--range", required=True, type=float,
                    help="benchmark range: 25.6, 51.2 or 76.8")
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    add_encoding(sp)
    sp.set_defaults(fn=cmd_fuse)

    sp = sub.add_parser("eval", help="score a prediction grid against ground truth")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--gt", required=True)
    sp.add_argument("--classes", help="comma list of class names or codes")
    sp.add_argument("--out", help="write the report JSON here")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("bench", help="full evaluation sweep")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--ranges", help="comma list, e.g. 25.6,51.2,76.8")
    sp.add_argument("--k", help="collaborator counts, e.g. 0..6 or 0,2,4")
    sp.add_argument("--mu", help="noise sweep start:stop:step (inclusive)")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", help="JSON run configuration (flags override)")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("downsample", help="reduce grid resolution")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--factor", required=True, help="integer or fx,fy,fz")
    sp.add_argument("--out", required=True)
    add_encoding(sp)
    sp.set_defaults(fn=cmd_downsample)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 1
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        msg = str(exc) or type(exc).__name__
        print(f"semvox: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
