"""semvox: semantic voxel annotation, visibility, and fusion benchmarks.

Dense semantic voxel ground truth is generated over synthetic labeled
scenes by a seeded trace-and-complete pipeline; single-agent observations
are simulated by ray-cast visibility; multi-agent fusion is evaluated
under configurable ranges, collaborator counts, and pose noise.
"""

from ._kernels import BACKENDS, HAVE_COMPILED, active_name, set_backend, use
from .annotate import (
    AnnotationStats,
    ResourceBudgetError,
    SeedMap,
    annotate,
    assign_labels,
    brute_force_annotate,
    occupancy_completion,
    top_down_trace,
)
from .bench import BenchmarkResult, derive_range_grid, prepare_observation, run_benchmark
from .fusion import (
    EvalReport,
    NoiseModel,
    evaluate,
    fuse,
    perturb_transform,
    select_collaborators,
)
from .geometry import (
    Aabb,
    Bvh,
    Obb,
    TriMesh,
    aabb_overlap,
    bvh_build,
    bvh_query,
    obb_aabb_overlap,
    tri_aabb_overlap,
)
from .grid import (
    GridConfigError,
    GridSpec,
    VoxelGrid,
    brute_force_op_count,
    grid_shape,
    point_to_voxel,
    voxel_aabb,
)
from .gridfile import (
    BadMagicError,
    GridFileError,
    PayloadMismatchError,
    TruncatedFileError,
    UnsupportedVersionError,
    read_grid,
    write_grid,
)
from .gridops import (
    compute_visibility,
    crop_to_range,
    downsample,
    observed_grid,
    relative_transform,
    warp_grid,
    warp_mask,
)
from .labels import DEFAULT_EVAL_CLASSES, DEFAULT_REGISTRY, EMPTY, LabelRegistry
from .scene import Agent, AgentPose, RigidTransform, Scene, SceneObject
from .sceneio import RunConfig, SceneFormatError, load_config, load_scene, save_scene

__version__ = "0.1.0"
