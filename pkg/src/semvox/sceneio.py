"""Scene and run-configuration files (JSON, UTF-8).

Scene documents carry top-level `objects` and `agents` arrays:

    object: {"id": int, "label": name-or-code, "geometry": {...}}
      obb geometry:  {"type": "obb", "center": [3], "half_extents": [3],
                      "rotation": [9 row-major]}
      mesh geometry: {"type": "mesh", "vertices": [[3]...],
                      "triangles": [[3]...],
                      "pose": {"rotation": [9 row-major], "translation": [3]}}
    agent:  {"id": int, "pose": {"rotation": [9], "translation": [3]},
             "sensor": {"origin": [3], "fov_deg": float, "max_range_m": float}}

Validation failures name the offending field with its location.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fusion import NoiseModel
from .grid import GridSpec
from .labels import DEFAULT_EVAL_CLASSES, DEFAULT_REGISTRY, LabelRegistry
from .geometry import Obb, TriMesh
from .scene import Agent, RigidTransform, Scene, SceneObject


class SceneFormatError(ValueError):
    pass


def _fail(where: str, msg: str):
    raise SceneFormatError(f"{where}: {msg}")


def _need(mapping, key, where):
    if not isinstance(mapping, dict):
        _fail(where, f"expected an object, got {type(mapping).__name__}")
    if key not in mapping:
        _fail(where, f"missing required field {key!r}")
    return mapping[key]


def _floats(value, n, where) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64).reshape(n)
    except Exception:
        _fail(where, f"expected {n} numbers")
    if not np.all(np.isfinite(arr)):
        _fail(where, "non-finite value")
    return arr


def _rotation9(value, where) -> np.ndarray:
    arr = _floats(value, 9, where).reshape(3, 3)
    return arr


def _parse_transform(value, where) -> RigidTransform:
    rot = _rotation9(_need(value, "rotation", where), f"{where}.rotation")
    t = _floats(_need(value, "translation", where), 3, f"{where}.translation")
    try:
        return RigidTransform(rot, t)
    except ValueError as exc:
        _fail(where, str(exc))


def _parse_object(entry, where, registry: LabelRegistry) -> SceneObject:
    oid = _need(entry, "id", where)
    label_raw = _need(entry, "label", where)
    try:
        label = registry.resolve(label_raw)
    except KeyError as exc:
        _fail(f"{where}.label", str(exc))
    geo = _need(entry, "geometry", where)
    gtype = _need(geo, "type", f"{where}.geometry")
    gw = f"{where}.geometry"
    try:
        if gtype == "obb":
            obb = Obb(center=_floats(_need(geo, "center", gw), 3, f"{gw}.center"),
                      half_extents=_floats(_need(geo, "half_extents", gw), 3,
                                           f"{gw}.half_extents"),
                      rotation=_rotation9(_need(geo, "rotation", gw), f"{gw}.rotation"))
            return SceneObject(id=oid, label=label, geometry=obb)
        if gtype == "mesh":
            mesh = TriMesh(vertices=_need(geo, "vertices", gw),
                           triangles=_need(geo, "triangles", gw))
            pose = _parse_transform(_need(geo, "pose", gw), f"{gw}.pose")
            return SceneObject(id=oid, label=label, geometry=mesh, pose=pose)
    except SceneFormatError:
        raise
    except (ValueError, TypeError) as exc:
        _fail(gw, str(exc))
    _fail(f"{gw}.type", f"unknown geometry type {gtype!r}")


def _parse_agent(entry, where) -> Agent:
    aid = _need(entry, "id", where)
    pose = _parse_transform(_need(entry, "pose", where), f"{where}.pose")
    sensor = _need(entry, "sensor", where)
    sw = f"{where}.sensor"
    try:
        return Agent(id=aid, pose=pose,
                     sensor_origin=_floats(_need(sensor, "origin", sw), 3, f"{sw}.origin"),
                     fov_deg=float(_need(sensor, "fov_deg", sw)),
                     max_range=float(_need(sensor, "max_range_m", sw)))
    except SceneFormatError:
        raise
    except (ValueError, TypeError) as exc:
        _fail(sw, str(exc))


def load_scene(path: str | Path, registry: LabelRegistry = DEFAULT_REGISTRY) -> Scene:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON ({exc})") from None
    where = str(path)
    objects_raw = _need(doc, "objects", where)
    agents_raw = _need(doc, "agents", where)
    if not isinstance(objects_raw, list):
        _fail(f"{where}.objects", "expected an array")
    if not isinstance(agents_raw, list):
        _fail(f"{where}.agents", "expected an array")
    objects = [_parse_object(o, f"{where}: objects[{i}]", registry)
               for i, o in enumerate(objects_raw)]
    agents = [_parse_agent(a, f"{where}: agents[{i}]")
              for i, a in enumerate(agents_raw)]
    try:
        return Scene(objects=objects, agents=agents)
    except ValueError as exc:
        raise SceneFormatError(f"{where}: {exc}") from None


def scene_to_dict(scene: Scene, registry: LabelRegistry = DEFAULT_REGISTRY) -> dict:
    """Inverse of load_scene, for writing synthetic scenes to disk."""
    objects = []
    for o in scene.objects:
        if isinstance(o.geometry, Obb):
            geo = {"type": "obb",
                   "center": o.geometry.center.tolist(),
                   "half_extents": o.geometry.half_extents.tolist(),
                   "rotation": o.geometry.rotation.reshape(-1).tolist()}
        else:
            geo = {"type": "mesh",
                   "vertices": o.geometry.vertices.tolist(),
                   "triangles": o.geometry.triangles.tolist(),
                   "pose": {"rotation": o.pose.rotation.reshape(-1).tolist(),
                            "translation": o.pose.translation.tolist()}}
        objects.append({"id": o.id, "label": registry.name(o.label), "geometry": geo})
    agents = [{"id": a.id,
               "pose": {"rotation": a.pose.rotation.reshape(-1).tolist(),
                        "translation": a.pose.translation.tolist()},
               "sensor": {"origin": a.sensor_origin.tolist(),
                          "fov_deg": a.fov_deg,
                          "max_range_m": a.max_range}}
              for a in scene.agents]
    return {"objects": objects, "agents": agents}


def save_scene(scene: Scene, path: str | Path,
               registry: LabelRegistry = DEFAULT_REGISTRY) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene, registry), indent=2) + "\n",
                          encoding="utf-8")


@dataclass
class RunConfig:
    """Benchmark sweep configuration."""

    ranges: list[float] = field(default_factory=lambda: [25.6, 51.2, 76.8])
    k_values: list[int] = field(default_factory=lambda: [0, 1])
    mu_values: list[float] = field(default_factory=lambda: [0.0])
    sigma: float = 0.0
    seed: int = 0
    egos: list[int] | None = None
    classes: tuple[int, ...] = DEFAULT_EVAL_CLASSES
    derive: str = "downsample"

    def range_specs(self) -> list[GridSpec]:
        return [GridSpec.benchmark(r) for r in self.ranges]

    def noise_models(self) -> list[NoiseModel]:
        return [NoiseModel(mu=m, sigma=self.sigma, seed=self.seed)
                for m in self.mu_values]


def load_config(path: str | Path,
                registry: LabelRegistry = DEFAULT_REGISTRY) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise SceneFormatError(f"{path}: expected a JSON object")
    cfg = RunConfig()
    where = str(path)
    if "ranges" in doc:
        cfg.ranges = [float(v) for v in doc["ranges"]]
    if "k_values" in doc:
        cfg.k_values = [int(v) for v in doc["k_values"]]
        if any(k < 0 for k in cfg.k_values):
            _fail(f"{where}.k_values", "collaborator counts must be >= 0")
    if "mu_values" in doc:
        cfg.mu_values = [float(v) for v in doc["mu_values"]]
    if "sigma" in doc:
        cfg.sigma = float(doc["sigma"])
    if "seed" in doc:
        cfg.seed = int(doc["seed"])
    if "egos" in doc:
        cfg.egos = [int(v) for v in doc["egos"]]
    if "derive" in doc:
        cfg.derive = str(doc["derive"])
        if cfg.derive not in ("downsample", "annotate"):
            _fail(f"{where}.derive", f"unknown derivation mode {cfg.derive!r}")
    if "classes" in doc:
        try:
            cfg.classes = tuple(registry.resolve(c) for c in doc["classes"])
        except KeyError as exc:
            _fail(f"{where}.classes", str(exc))
    try:
        cfg.range_specs()
        for m in cfg.mu_values:
            NoiseModel(mu=m, sigma=cfg.sigma)
    except ValueError as exc:
        raise SceneFormatError(f"{where}: {exc}") from None
    return cfg
