"""Ground-depth estimation toolkit.

Pose-aware per-pixel ground-depth maps from pinhole intrinsics, the
ground-aware fusion transformer, KITTI parsers, and synthetic-scene
experiments. The heavy lifting lives in the compiled ``_gde`` module.
"""

from _gde import (  # noqa: F401
    AblationResult,
    BucketError,
    CameraIntrinsics,
    CameraPose,
    ExperimentConfig,
    GdeError,
    GroundDepthMap,
    GroundPlaneConfig,
    HorizonLine,
    PoseObservation,
    RobustnessResult,
    RobustnessSummary,
    VanishingPoint,
    back_project,
    build_map,
    default_stabilizer,
    depth_from_displaced_contact,
    detect_horizon_row,
    encode_disparity,
    encode_disparity_from_depth,
    fit_pose,
    fusion,
    g_map,
    kitti,
    map_to_csv,
    map_to_pgm,
    parse_observations_csv,
    pose_loss,
    project,
    ray_ground_intersection,
    render_observations,
    run_ablation,
    run_robustness,
    scale_intrinsics,
)

__all__ = [name for name in dir() if not name.startswith("_")]
