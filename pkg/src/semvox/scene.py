"""Scene model: labeled rigid objects plus agents with simple sensors.

A Scene is the collision world that annotation runs against. Objects are
oriented boxes or triangle meshes (meshes carry a pose); every object has
a non-empty semantic label. Agents have an SE(3) pose mapping their local
frame into the scene frame, and a sensor described by an origin offset,
horizontal field of view, and maximum range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Aabb, Obb, TriMesh, bvh_build, check_rotation, _vec3
from .labels import EMPTY, MAX_LABELS


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """SE(3) transform: p -> rotation @ p + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", check_rotation(self.rotation))
        object.__setattr__(self, "translation", _vec3(self.translation))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.eye(3), t)

    @classmethod
    def from_yaw(cls, yaw_rad: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        c, s = np.cos(yaw_rad), np.sin(yaw_rad)
        r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls(r, translation)

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -(rt @ self.translation))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self @ other)(p) == self(other(p))."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def is_identity(self, tol: float = 0.0) -> bool:
        return (np.abs(self.rotation - np.eye(3)).max() <= tol
                and np.abs(self.translation).max() <= tol)


AgentPose = RigidTransform


@dataclass(eq=False)
class SceneObject:
    """A labeled rigid object. Mesh geometry carries its own pose; oriented
    boxes are already posed. `volume_hint` (m^3) feeds the deterministic
    label-conflict rule: smaller objects win overlapping voxels."""

    id: int
    label: int
    geometry: Obb | TriMesh
    pose: RigidTransform | None = None
    volume_hint: float = field(init=False)

    def __post_init__(self):
        self.id = int(self.id)
        self.label = int(self.label)
        if not EMPTY < self.label < MAX_LABELS:
            raise ValueError(f"object {self.id}: label must be in [1, {MAX_LABELS - 1}], "
                             f"got {self.label}")
        if isinstance(self.geometry, Obb):
            if self.pose is not None:
                raise ValueError(f"object {self.id}: oriented boxes are already posed")
            self.volume_hint = self.geometry.volume
        elif isinstance(self.geometry, TriMesh):
            if self.pose is None:
                self.pose = RigidTransform.identity()
            self.volume_hint = abs(self.geometry.signed_volume)
        else:
            raise TypeError(f"object {self.id}: unsupported geometry "
                            f"{type(self.geometry).__name__}")

    def world_geometry(self) -> Obb | TriMesh:
        if isinstance(self.geometry, Obb):
            return self.geometry
        return self.geometry.transformed(self.pose.rotation, self.pose.translation)

    def world_aabb(self) -> Aabb:
        return self.world_geometry().aabb()

    def in_frame(self, t: RigidTransform) -> "SceneObject":
        """Re-express this object in a frame given by transform t applied
        to its current coordinates."""
        if isinstance(self.geometry, Obb):
            geom = self.geometry.transformed(t.rotation, t.translation)
            return SceneObject(self.id, self.label, geom)
        return SceneObject(self.id, self.label, self.geometry, t @ self.pose)


@dataclass(eq=False)
class Agent:
    """An agent with an SE(3) pose and a single ranging sensor."""

    id: int
    pose: RigidTransform
    sensor_origin: np.ndarray = (0.0, 0.0, 0.0)
    fov_deg: float = 360.0
    max_range: float = 50.0

    def __post_init__(self):
        self.id = int(self.id)
        self.sensor_origin = _vec3(self.sensor_origin)
        self.fov_deg = float(self.fov_deg)
        self.max_range = float(self.max_range)
        if not 0.0 < self.fov_deg <= 360.0:
            raise ValueError(f"agent {self.id}: fov_deg must be in (0, 360], "
                             f"got {self.fov_deg}")
        if not (np.isfinite(self.max_range) and self.max_range > 0):
            raise ValueError(f"agent {self.id}: max_range must be positive and finite")

    def in_frame(self, t: RigidTransform) -> "Agent":
        return Agent(self.id, t @ self.pose, self.sensor_origin,
                     self.fov_deg, self.max_range)


@dataclass(eq=False)
class Scene:
    """Immutable collision world: labeled objects plus at least one agent."""

    objects: list[SceneObject]
    agents: list[Agent]

    def __post_init__(self):
        obj_ids = [o.id for o in self.objects]
        if len(set(obj_ids)) != len(obj_ids):
            raise ValueError("duplicate object ids in scene")
        agent_ids = [a.id for a in self.agents]
        if len(set(agent_ids)) != len(agent_ids):
            raise ValueError("duplicate agent ids in scene")
        if not self.agents:
            raise ValueError("scene must contain at least one agent")

    def agent(self, agent_id: int) -> Agent:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(f"no agent with id {agent_id}")

    def object_bvh(self):
        return bvh_build([o.world_aabb() for o in self.objects])

    def in_frame(self, frame_pose: RigidTransform) -> "Scene":
        """Re-express the scene in the frame whose pose (frame->scene) is
        given; typically an agent pose, yielding that agent's view."""
        t = frame_pose.inverse()
        return Scene([o.in_frame(t) for o in self.objects],
                     [a.in_frame(t) for a in self.agents])
