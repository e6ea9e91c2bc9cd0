"""Multi-agent fusion and IoU evaluation.

Fusion is deterministic, mask-guided priority selection: the ego keeps
every voxel it observed; unobserved voxels take the label of the first
neighbor (in collaborator order) whose warped observation covers them,
the conjunction of the warp-validity mask and the neighbor's warped
observed mask. Nothing is ever fabricated: every non-empty fused voxel
traces back to some agent's observation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, VoxelGrid, specs_compatible
from .gridops import warp_indices
from .labels import DEFAULT_EVAL_CLASSES, EMPTY, MAX_LABELS
from .scene import Agent, RigidTransform

MAX_COLLABORATORS = 6


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian translation noise: offset magnitude ~ N(mu, sigma) clamped
    at zero, direction uniform on the horizontal unit circle."""

    mu: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")

    def stream(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def select_collaborators(ego: Agent, others: list[Agent], k: int) -> list[Agent]:
    """The min(k, 6) agents nearest to the ego by translation distance,
    ascending; ties broken by lower agent id."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    ranked = sorted(
        (a for a in others if a.id != ego.id),
        key=lambda a: (float(np.linalg.norm(a.pose.translation - ego.pose.translation)),
                       a.id),
    )
    return ranked[:min(k, MAX_COLLABORATORS)]


def perturb_transform(t: RigidTransform, noise: NoiseModel,
                      draw: np.random.Generator) -> RigidTransform:
    """Add a horizontal translation offset of Gaussian magnitude; rotation
    is untouched. Deterministic given the draw stream state."""
    theta = draw.uniform(0.0, 2.0 * np.pi)
    mag = max(0.0, draw.normal(noise.mu, noise.sigma))
    offset = np.array([mag * np.cos(theta), mag * np.sin(theta), 0.0])
    return RigidTransform(t.rotation, t.translation + offset)


def fuse(ego_obs: tuple[VoxelGrid, np.ndarray],
         neighbors: list[tuple[VoxelGrid, np.ndarray, RigidTransform]],
         spec: GridSpec) -> VoxelGrid:
    """Hybrid-mask fusion in the ego frame.

    `neighbors` must already be in collaborator priority order; each entry
    is (grid, observed mask, transform neighbor frame -> ego frame)."""
    ego_grid, ego_mask = ego_obs
    if not specs_compatible(ego_grid.spec, spec):
        raise ValueError("ego grid spec does not match the fusion spec")
    if ego_mask.shape != ego_grid.labels.shape:
        raise ValueError("ego observed mask shape mismatch")

    out = np.where(ego_mask, ego_grid.labels, np.uint8(EMPTY)).astype(np.uint8)
    claimed = ego_mask.astype(bool).copy()
    for grid_n, obs_n, t_n in neighbors:
        if obs_n.shape != grid_n.labels.shape:
            raise ValueError("neighbor observed mask shape mismatch")
        flat, valid = warp_indices(grid_n.spec, t_n, spec)
        src = flat.reshape(-1)
        warped_labels = grid_n.labels.reshape(-1)[src].reshape(spec.shape)
        warped_obs = obs_n.reshape(-1)[src].reshape(spec.shape)
        hybrid = valid & warped_obs
        take = hybrid & ~claimed
        out[take] = warped_labels[take]
        claimed |= take
    return VoxelGrid(spec, out)


@dataclass
class EvalReport:
    """Per-class IoU plus their mean. Classes with no support in either
    grid are absent and excluded from the mean; `empty` is never scored."""

    per_class_iou: dict[int, float]
    miou: float
    evaluated_classes: tuple[int, ...]
    counts: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    def to_dict(self, registry=None) -> dict:
        def name(c):
            return registry.name(c) if registry is not None else str(c)
        return {
            "miou": self.miou,
            "per_class_iou": {name(c): v for c, v in sorted(self.per_class_iou.items())},
            "evaluated_classes": [name(c) for c in self.evaluated_classes],
            "counts": {name(c): list(v) for c, v in sorted(self.counts.items())},
        }


def evaluate(pred: VoxelGrid, gt: VoxelGrid,
             classes: tuple[int, ...] = DEFAULT_EVAL_CLASSES) -> EvalReport:
    """Per-class IoU = TP / (TP + FP + FN) over voxel counts."""
    if pred.labels.shape != gt.labels.shape:
        raise ValueError(
            f"shape mismatch: pred {pred.labels.shape} vs gt {gt.labels.shape}")
    if not specs_compatible(pred.spec, gt.spec):
        raise ValueError("prediction and ground-truth grid specs differ")
    for c in classes:
        if not EMPTY < int(c) < MAX_LABELS:
            raise ValueError(f"class {c} out of range (empty is never evaluated)")

    p = pred.labels.reshape(-1)
    g = gt.labels.reshape(-1)
    pair = g.astype(np.uint16) * MAX_LABELS
    pair += p
    confusion = np.bincount(pair, minlength=MAX_LABELS * MAX_LABELS)
    confusion = confusion.reshape(MAX_LABELS, MAX_LABELS)
    pred_counts = confusion.sum(axis=0)
    gt_counts = confusion.sum(axis=1)
    tp_counts = np.diagonal(confusion)

    per_class: dict[int, float] = {}
    counts: dict[int, tuple[int, int, int]] = {}
    for c in classes:
        tp = int(tp_counts[c])
        fp = int(pred_counts[c]) - tp
        fn = int(gt_counts[c]) - tp
        union = tp + fp + fn
        if union == 0:
            continue
        per_class[int(c)] = tp / union
        counts[int(c)] = (tp, fp, fn)
    miou = sum(per_class.values()) / len(per_class) if per_class else 0.0
    return EvalReport(per_class_iou=per_class, miou=miou,
                      evaluated_classes=tuple(int(c) for c in classes),
                      counts=counts)
