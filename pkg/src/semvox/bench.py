"""Collaborative-perception benchmark sweeps.

For every (ego, range, collaborator count, noise model) cell: annotate the
scene in the ego frame, simulate each agent's observation by visibility,
fuse the neighbors' warped observations, and score IoU against the full
ground truth. Cells are independent; each derives its random stream from
(seed, ego, range, k) so reruns are byte-identical and noise sweeps share
draws (common random numbers across mu levels).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotate import annotate
from .fusion import NoiseModel, evaluate, fuse, perturb_transform, select_collaborators
from .grid import GridSpec, VoxelGrid
from .gridops import compute_visibility, crop_to_range, downsample, observed_grid, relative_transform
from .labels import DEFAULT_EVAL_CLASSES, DEFAULT_REGISTRY
from .scene import Agent, RigidTransform, Scene
from .util import canonical_json, resolve_workers


@dataclass
class BenchmarkResult:
    seed: int
    classes: tuple[int, ...]
    records: list[dict]
    timings: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return canonical_json({
            "seed": self.seed,
            "classes": [DEFAULT_REGISTRY.name(c) for c in self.classes],
            "records": self.records,
        })

    def table(self) -> str:
        return render_tables(self.records)

    def write(self, outdir: str | Path) -> dict[str, Path]:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "report": out / "report.json",
            "table": out / "report.txt",
            "timings": out / "timings.json",
        }
        paths["report"].write_text(self.to_json(), encoding="utf-8")
        paths["table"].write_text(self.table(), encoding="utf-8")
        paths["timings"].write_text(canonical_json(
            {"cell_seconds": self.timings}), encoding="utf-8")
        return paths


def derive_range_grid(master: VoxelGrid, range_spec: GridSpec) -> VoxelGrid:
    """Crop the master annotation to the range window at master resolution,
    then downsample to the range resolution."""
    factor = round(range_spec.resolution / master.spec.resolution)
    if factor < 1 or abs(range_spec.resolution - factor * master.spec.resolution) \
            > 1e-6 * range_spec.resolution:
        raise ValueError(
            f"range resolution {range_spec.resolution} is not an integer multiple "
            f"of master resolution {master.spec.resolution}")
    fine_spec = GridSpec(range_spec.origin, range_spec.extent, master.spec.resolution)
    fine = crop_to_range(master, fine_spec)
    return downsample(fine, factor)


def _own_frame_agent(agent: Agent) -> Agent:
    return Agent(agent.id, RigidTransform.identity(), agent.sensor_origin,
                 agent.fov_deg, agent.max_range)


def prepare_observation(scene: Scene, agent: Agent, range_spec: GridSpec,
                        master_spec: GridSpec | None = None,
                        derive: str = "downsample", workers: int | None = None):
    """Ground truth and observation for one agent at one range, in the
    agent's own frame. Returns (gt, observed grid, observed mask)."""
    local = scene.in_frame(agent.pose)
    if derive == "annotate" or master_spec is None:
        gt, _ = annotate(local, range_spec, workers=workers)
    elif derive == "downsample":
        master, _ = annotate(local, master_spec, workers=workers)
        gt = derive_range_grid(master, range_spec)
    else:
        raise ValueError(f"unknown derivation mode {derive!r}")
    vis = compute_visibility(gt, _own_frame_agent(agent))
    obs, obs_mask = observed_grid(gt, vis)
    return gt, obs, obs_mask


def _cell_rng(seed: int, ego_idx: int, range_idx: int, k: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(ego_idx, range_idx, k))
    return np.random.default_rng(ss)


def run_benchmark(scene: Scene, master_spec: GridSpec | None,
                  ranges: list[GridSpec], k_values: list[int],
                  noise_models: list[NoiseModel], *, seed: int = 0,
                  classes: tuple[int, ...] = DEFAULT_EVAL_CLASSES,
                  egos: list[int] | None = None,
                  derive: str = "downsample",
                  workers: int | None = None) -> BenchmarkResult:
    """Run the full (ego x range x k x noise) cross-product."""
    agents = scene.agents
    if egos is None:
        ego_list = list(agents)
    else:
        ego_list = [scene.agent(e) for e in egos]

    # Per-(agent, range) observations are ego-independent; build them once.
    obs_cache: dict[tuple[int, int], tuple] = {}
    obs_errors: dict[tuple[int, int], str] = {}
    needed = {a.id for a in ego_list}
    for e in ego_list:
        for other in select_collaborators(e, agents, max(k_values, default=0)):
            needed.add(other.id)
    for agent in agents:
        if agent.id not in needed:
            continue
        for ri, rspec in enumerate(ranges):
            try:
                obs_cache[(agent.id, ri)] = prepare_observation(
                    scene, agent, rspec, master_spec, derive, workers)
            except Exception as exc:
                obs_errors[(agent.id, ri)] = str(exc)

    cells = [(ei, ri, k, ni)
             for ei in range(len(ego_list))
             for ri in range(len(ranges))
             for k in k_values
             for ni in range(len(noise_models))]

    def run_cell(cell):
        ei, ri, k, ni = cell
        ego = ego_list[ei]
        noise = noise_models[ni]
        rspec = ranges[ri]
        base = {
            "ego": ego.id,
            "range": f"{rspec.extent[0]:g}",
            "k": k,
            "mu": noise.mu,
            "sigma": noise.sigma,
        }
        t0 = time.perf_counter()
        try:
            if (ego.id, ri) in obs_errors:
                raise ValueError(obs_errors[(ego.id, ri)])
            gt_e, obs_e, mask_e = obs_cache[(ego.id, ri)]
            neighbors = select_collaborators(ego, agents, k)
            rng = _cell_rng(seed, ei, ri, k)
            entries = []
            for nb in neighbors:
                t = relative_transform(ego.pose, nb.pose)
                t = perturb_transform(t, noise, rng)
                if (nb.id, ri) in obs_errors:
                    raise ValueError(obs_errors[(nb.id, ri)])
                _, obs_n, mask_n = obs_cache[(nb.id, ri)]
                entries.append((obs_n, mask_n, t))
            fused = fuse((obs_e, mask_e), entries, gt_e.spec)
            rep = evaluate(fused, gt_e, classes)
            rec = dict(base)
            rec["miou"] = rep.miou
            rec["per_class_iou"] = {DEFAULT_REGISTRY.name(c): v
                                    for c, v in sorted(rep.per_class_iou.items())}
        except Exception as exc:
            rec = dict(base)
            rec["error"] = str(exc)
        return rec, time.perf_counter() - t0

    n_workers = resolve_workers(workers)
    if n_workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            results = list(ex.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]

    return BenchmarkResult(
        seed=seed,
        classes=tuple(classes),
        records=[r for r, _ in results],
        timings=[t for _, t in results],
    )


def _mean(vals):
    vals = list(vals)
    return sum(vals) / len(vals) if vals else float("nan")


def render_tables(records: list[dict]) -> str:
    """Aligned text tables: mean mIoU by collaborator count per range, and
    by noise level per range at the largest k."""
    ok = [r for r in records if "error" not in r]
    ranges = sorted({r["range"] for r in ok}, key=float)
    lines = []

    ks = sorted({r["k"] for r in ok})
    if ks:
        lines.append("mean mIoU by collaborator count (noiseless cells only)")
        header = f"{'k':>4} | " + " | ".join(f"{rg + 'm':>8}" for rg in ranges)
        lines.append(header)
        lines.append("-" * len(header))
        noiseless = [r for r in ok if r["mu"] == 0.0]
        pool = noiseless if noiseless else ok
        for k in ks:
            cells = []
            for rg in ranges:
                vals = [r["miou"] for r in pool if r["k"] == k and r["range"] == rg]
                cells.append(f"{_mean(vals):8.4f}" if vals else f"{'-':>8}")
            lines.append(f"{k:>4} | " + " | ".join(cells))
        lines.append("")

    mus = sorted({(r["mu"], r["sigma"]) for r in ok})
    if len(mus) > 1:
        kmax = max(ks) if ks else 0
        lines.append(f"mean mIoU by pose noise (k={kmax})")
        header = f"{'mu':>6} {'sigma':>6} | " + " | ".join(f"{rg + 'm':>8}" for rg in ranges)
        lines.append(header)
        lines.append("-" * len(header))
        for mu, sigma in mus:
            cells = []
            for rg in ranges:
                vals = [r["miou"] for r in ok
                        if r["mu"] == mu and r["sigma"] == sigma
                        and r["k"] == kmax and r["range"] == rg]
                cells.append(f"{_mean(vals):8.4f}" if vals else f"{'-':>8}")
            lines.append(f"{mu:>6.2f} {sigma:>6.2f} | " + " | ".join(cells))
        lines.append("")

    n_err = len(records) - len(ok)
    lines.append(f"{len(records)} cells, {n_err} failed")
    return "\n".join(lines) + "\n"
