"""rcmscope: kinematics and workspace analysis for a 2-DOF spherical-wrist
endoscope holder with a remote center of motion."""

from .analysis import (
    CoverageResult,
    OrientationMap,
    ReachabilityReport,
    SpanReport,
    coverage,
    orientation_map,
    reachability,
    required_span,
    span_from_targets,
)
from .anatomy import (
    ColumnStats,
    EarMeasurement,
    EarWorkspace,
    SinusMeasurement,
    SinusWorkspace,
    column_stats,
    ear_workspace,
    load_bundled_table,
    parse_measurements,
    sample_targets,
    serialize_measurements,
    sinus_workspace,
    stats_table,
)
from .mechanism import (
    EndoscopePose,
    LimitReport,
    MechanismConfig,
    angles_from_target,
    check_limits,
    endoscope_pose,
)
from .optimizer import (
    DesignBounds,
    DesignVariables,
    OptimizationReport,
    optimize,
    sensitivity,
)
from .wrist import (
    Direction3,
    JointAngles,
    OrientationAngles,
    dexterity,
    direction_vector,
    forward_kinematics,
    inverse_kinematics,
    singularity_margin,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnStats",
    "CoverageResult",
    "DesignBounds",
    "DesignVariables",
    "Direction3",
    "EarMeasurement",
    "EarWorkspace",
    "EndoscopePose",
    "JointAngles",
    "LimitReport",
    "MechanismConfig",
    "OptimizationReport",
    "OrientationAngles",
    "OrientationMap",
    "ReachabilityReport",
    "SinusMeasurement",
    "SinusWorkspace",
    "SpanReport",
    "angles_from_target",
    "check_limits",
    "column_stats",
    "coverage",
    "dexterity",
    "direction_vector",
    "ear_workspace",
    "endoscope_pose",
    "forward_kinematics",
    "inverse_kinematics",
    "load_bundled_table",
    "optimize",
    "orientation_map",
    "parse_measurements",
    "reachability",
    "required_span",
    "sample_targets",
    "sensitivity",
    "serialize_measurements",
    "singularity_margin",
    "sinus_workspace",
    "span_from_targets",
    "stats_table",
]
