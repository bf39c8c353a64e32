"""Reachability, coverage, angular-span, and orientation-map computations.

Per-target checks are independent, so the heavy paths run vectorized over
numpy arrays; reductions are order-independent and every result is a pure
function of its inputs (including the sampling seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .anatomy import sample_targets
from .errors import DomainError
from .mechanism import (
    DEGENERATE_DEPTH_MM,
    MechanismConfig,
    Vec3,
    check_limits,
    endoscope_pose,  # noqa: F401  (re-exported for callers aiming at reports)
)
from .wrist import (
    JointAngles,
    OrientationAngles,
    dexterity,
    inverse_kinematics,
    singularity_margin,
)

# fail-reason labels used in reports and the coverage CSV
FAIL_DEGENERATE = "degenerate_target"
FAIL_BEHIND = "behind_rcm"
FAIL_LIMIT_ALPHA = "limit_alpha"
FAIL_LIMIT_BETA = "limit_beta"
FAIL_DEPTH = "depth"

# above this many targets the apex angle switches to the convex-hull path
_EXACT_APEX_LIMIT = 2000


@dataclass(frozen=True, slots=True)
class ReachabilityReport:
    """Outcome of aiming at a single target point."""

    target_mm: Vec3
    reachable: bool
    fail_reasons: tuple[str, ...]
    alpha: float | None
    beta: float | None
    depth_mm: float | None
    singularity_margin_rad: float | None = None
    dexterity: float | None = None


def reachability(config: MechanismConfig, target_mm) -> ReachabilityReport:
    """Check one target against limits and insertion range.

    Unreachable targets carry the failing constraint names; reachable ones
    carry the pose angles with their singularity margin and dexterity.
    """
    target = tuple(float(v) for v in target_mm)
    delta = np.asarray(target) - np.asarray(config.rcm_point_mm)
    depth = float(np.linalg.norm(delta))
    if depth < DEGENERATE_DEPTH_MM:
        return ReachabilityReport(target, False, (FAIL_DEGENERATE,), None, None, depth)
    if delta[2] / depth <= 0.0:
        return ReachabilityReport(target, False, (FAIL_BEHIND,), None, None, depth)

    u = delta / depth
    beta = math.asin(min(1.0, max(-1.0, float(u[0]))))
    alpha = math.atan2(-float(u[1]), float(u[2]))
    reasons = []
    report = check_limits(config, OrientationAngles(alpha, beta))
    if not report.alpha_ok:
        reasons.append(FAIL_LIMIT_ALPHA)
    if not report.beta_ok:
        reasons.append(FAIL_LIMIT_BETA)
    d_min, d_max = config.insertion_range_mm
    if not (d_min <= depth <= d_max):
        reasons.append(FAIL_DEPTH)
    if reasons:
        return ReachabilityReport(target, False, tuple(reasons), alpha, beta, depth)

    joints = inverse_kinematics(OrientationAngles(alpha, beta))
    margin = singularity_margin(joints)
    try:
        dex = dexterity(joints)
    except DomainError:
        dex = float("inf")
    return ReachabilityReport(target, True, (), alpha, beta, depth, margin, dex)


def _reach_arrays(config: MechanismConfig, targets: np.ndarray) -> dict:
    """Vectorized reachability over an (N, 3) target array.

    Mirrors reachability() exactly: same boundary conventions, same reasons.
    """
    delta = targets - np.asarray(config.rcm_point_mm)
    depth = np.linalg.norm(delta, axis=1)
    degenerate = depth < DEGENERATE_DEPTH_MM
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(degenerate[:, None], np.nan, delta / np.where(depth == 0.0, 1.0, depth)[:, None])
    behind = ~degenerate & (u[:, 2] <= 0.0)
    valid = ~degenerate & ~behind

    beta = np.arcsin(np.clip(u[:, 0], -1.0, 1.0))
    alpha = np.arctan2(-u[:, 1], u[:, 2])
    with np.errstate(invalid="ignore"):
        bad_alpha = valid & (np.abs(alpha) > config.limit_alpha)
        bad_beta = valid & (np.abs(beta) > config.limit_beta)
    d_min, d_max = config.insertion_range_mm
    bad_depth = valid & ((depth < d_min) | (depth > d_max))
    reachable = valid & ~bad_alpha & ~bad_beta & ~bad_depth
    return {
        "depth": depth,
        "alpha": alpha,
        "beta": beta,
        "degenerate": degenerate,
        "behind": behind,
        "bad_alpha": bad_alpha,
        "bad_beta": bad_beta,
        "bad_depth": bad_depth,
        "reachable": reachable,
    }


def coverage_fraction(config: MechanismConfig, targets: np.ndarray) -> float:
    """Reachable fraction of a fixed target array (fast path, no per-point rows)."""
    return float(_reach_arrays(config, targets)["reachable"].mean())


@dataclass(frozen=True, slots=True)
class CoveragePoint:
    """Per-target row of a coverage computation."""

    target_mm: Vec3
    reachable: bool
    fail_reasons: tuple[str, ...]
    alpha: float | None
    beta: float | None
    depth_mm: float


@dataclass(frozen=True)
class CoverageResult:
    """Reachable fraction plus the per-target map, in sampling order."""

    fraction: float
    points: tuple[CoveragePoint, ...]

    @property
    def n_reachable(self) -> int:
        return sum(1 for p in self.points if p.reachable)


def coverage(config: MechanismConfig, workspace, step_mm: float | None = None,
             count: int | None = None, seed: int = 0) -> CoverageResult:
    """Fraction of sampled workspace targets the mechanism can aim at."""
    targets = sample_targets(workspace, step_mm=step_mm, count=count, seed=seed)
    arrays = _reach_arrays(config, targets)
    points = []
    for i in range(targets.shape[0]):
        target = tuple(float(v) for v in targets[i])
        if arrays["degenerate"][i]:
            points.append(CoveragePoint(target, False, (FAIL_DEGENERATE,), None, None,
                                        float(arrays["depth"][i])))
            continue
        if arrays["behind"][i]:
            points.append(CoveragePoint(target, False, (FAIL_BEHIND,), None, None,
                                        float(arrays["depth"][i])))
            continue
        reasons = []
        if arrays["bad_alpha"][i]:
            reasons.append(FAIL_LIMIT_ALPHA)
        if arrays["bad_beta"][i]:
            reasons.append(FAIL_LIMIT_BETA)
        if arrays["bad_depth"][i]:
            reasons.append(FAIL_DEPTH)
        points.append(
            CoveragePoint(
                target,
                bool(arrays["reachable"][i]),
                tuple(reasons),
                float(arrays["alpha"][i]),
                float(arrays["beta"][i]),
                float(arrays["depth"][i]),
            )
        )
    fraction = float(arrays["reachable"].mean())
    return CoverageResult(fraction, tuple(points))


# ---------------------------------------------------------------------------
# Angular span


@dataclass(frozen=True, slots=True)
class SpanReport:
    """Angular requirements of a workspace as seen from a remote-center point.

    apex_angle_rad is the largest angle between any two target directions;
    n_excluded counts targets with no defined direction (at or behind the
    remote-center plane), which are left out of the maxima.
    """

    max_abs_alpha: float
    max_abs_beta: float
    apex_angle_rad: float
    n_targets: int
    n_excluded: int


def _max_pairwise_angle(directions: np.ndarray) -> float:
    """Largest angle between any two unit vectors (exact for small sets,
    convex-hull reduction above _EXACT_APEX_LIMIT)."""
    n = directions.shape[0]
    if n <= 1:
        return 0.0
    if n > _EXACT_APEX_LIMIT:
        try:
            hull = ConvexHull(directions)
            directions = directions[hull.vertices]
        except QhullError:
            # degenerate direction sets (coplanar/collinear): uniform stride
            stride = int(math.ceil(n / _EXACT_APEX_LIMIT))
            directions = directions[::stride]
    dots = directions @ directions.T
    return float(math.acos(min(1.0, max(-1.0, float(dots.min())))))


def span_from_targets(targets, rcm_point_mm: Vec3 = (0.0, 0.0, 0.0)) -> SpanReport:
    """Span report over an explicit (N, 3) target array."""
    targets = np.asarray(targets, dtype=float).reshape(-1, 3)
    delta = targets - np.asarray(rcm_point_mm, dtype=float)
    depth = np.linalg.norm(delta, axis=1)
    valid = (depth >= DEGENERATE_DEPTH_MM) & (delta[:, 2] > 0.0)
    n_excluded = int((~valid).sum())
    if not valid.any():
        raise DomainError("no targets in the forward half-space of the remote center")
    u = delta[valid] / depth[valid][:, None]
    beta = np.arcsin(np.clip(u[:, 0], -1.0, 1.0))
    alpha = np.arctan2(-u[:, 1], u[:, 2])
    return SpanReport(
        max_abs_alpha=float(np.abs(alpha).max()),
        max_abs_beta=float(np.abs(beta).max()),
        apex_angle_rad=_max_pairwise_angle(u),
        n_targets=int(targets.shape[0]),
        n_excluded=n_excluded,
    )


def required_span(workspace, rcm_point_mm: Vec3 = (0.0, 0.0, 0.0),
                  step_mm: float | None = None, count: int | None = None,
                  seed: int = 0) -> SpanReport:
    """Angular span required to aim at every sampled workspace target."""
    targets = sample_targets(workspace, step_mm=step_mm, count=count, seed=seed)
    return span_from_targets(targets, rcm_point_mm)


# ---------------------------------------------------------------------------
# Orientation map


@dataclass(frozen=True, slots=True)
class MapCell:
    """One grid cell of the orientation map (angles in radians)."""

    alpha: float
    beta: float
    admissible: bool
    singularity_margin_rad: float
    dexterity: float


@dataclass(frozen=True)
class OrientationMap:
    """Rectangular (alpha, beta) grid over the joint-limit box, alpha-major."""

    cells: tuple[MapCell, ...]
    n_alpha: int
    n_beta: int


def orientation_map(config: MechanismConfig, n_per_axis: int = 45) -> OrientationMap:
    """Admissibility, singularity margin, and dexterity over the limit box."""
    if n_per_axis < 2:
        raise ValueError(f"n_per_axis must be >= 2, got {n_per_axis!r}")
    alphas = np.linspace(-config.limit_alpha, config.limit_alpha, n_per_axis)
    betas = np.linspace(-config.limit_beta, config.limit_beta, n_per_axis)
    cells = []
    for a in alphas:
        for b in betas:
            angles = OrientationAngles(float(a), float(b))
            admissible = check_limits(config, angles).admissible
            joints = inverse_kinematics(angles)
            margin = singularity_margin(joints)
            try:
                dex = dexterity(joints)
            except DomainError:
                dex = float("inf")
            cells.append(MapCell(angles.alpha, angles.beta, admissible, margin, dex))
    return OrientationMap(tuple(cells), n_per_axis, n_per_axis)
