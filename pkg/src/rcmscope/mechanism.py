"""Assembled device model: the spherical wrist's orientation is transmitted
through a double parallelogram so the endoscope shaft pivots about a fixed
remote center while translating along its own axis for insertion.

World frame: z is the zero-orientation shaft direction, so the shaft tip is
rcm + depth * direction(alpha, beta). The parallelogram height enters only
through a declared linear surrogate on the insertion maximum (the published
design gives no link geometry to model the coupling exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DegenerateTarget,
    DepthOutOfRange,
    DomainError,
    LimitViolation,
)
from .wrist import Direction3, OrientationAngles, direction_vector

Vec3 = tuple[float, float, float]

# targets closer than this to the remote center have no defined direction
DEGENERATE_DEPTH_MM = 1e-9


@dataclass(frozen=True, slots=True)
class MechanismConfig:
    """Device geometry and travel limits.

    limit_alpha / limit_beta are symmetric joint-limit bounds in radians,
    restricted to (0, pi/2). insertion_range_mm is the closed [d_min, d_max]
    window along the shaft. parallelogram_height_mm with height_to_dmax_gain
    defines the linear surrogate d_max(h) = d_max + gain * (h - height).
    """

    rcm_point_mm: Vec3
    limit_alpha: float
    limit_beta: float
    insertion_range_mm: tuple[float, float]
    parallelogram_height_mm: float
    height_to_dmax_gain: float = 1.0

    def __post_init__(self):
        rcm = tuple(float(v) for v in self.rcm_point_mm)
        if len(rcm) != 3 or not all(math.isfinite(v) for v in rcm):
            raise ConfigError(f"rcm_point_mm: must be a finite 3-vector, got {self.rcm_point_mm!r}")
        object.__setattr__(self, "rcm_point_mm", rcm)
        for name, lim in (("limit_alpha", self.limit_alpha), ("limit_beta", self.limit_beta)):
            if not (math.isfinite(lim) and 0.0 < lim < math.pi / 2.0):
                raise ConfigError(f"{name}: must lie in (0, pi/2) rad, got {lim!r}")
        rng = tuple(float(v) for v in self.insertion_range_mm)
        if len(rng) != 2 or not (math.isfinite(rng[0]) and math.isfinite(rng[1])):
            raise ConfigError(f"insertion_range_mm: must be a finite pair, got {self.insertion_range_mm!r}")
        if not (0.0 <= rng[0] < rng[1]):
            raise ConfigError(f"insertion_range_mm: need 0 <= d_min < d_max, got {rng!r}")
        object.__setattr__(self, "insertion_range_mm", rng)
        if not (math.isfinite(self.parallelogram_height_mm) and self.parallelogram_height_mm > 0.0):
            raise ConfigError(
                f"parallelogram_height_mm: must be > 0, got {self.parallelogram_height_mm!r}"
            )
        if not math.isfinite(self.height_to_dmax_gain):
            raise ConfigError(f"height_to_dmax_gain: must be finite, got {self.height_to_dmax_gain!r}")

    @property
    def d_min_mm(self) -> float:
        return self.insertion_range_mm[0]

    @property
    def d_max_mm(self) -> float:
        return self.insertion_range_mm[1]

    def with_design(self, rcm_offset_mm, parallelogram_height_mm: float) -> "MechanismConfig":
        """Apply design variables: translate the RCM and rescale d_max through
        the linear height surrogate. Raises ConfigError if the shifted window
        collapses."""
        rcm = tuple(p + float(o) for p, o in zip(self.rcm_point_mm, rcm_offset_mm))
        d_max = self.d_max_mm + self.height_to_dmax_gain * (
            float(parallelogram_height_mm) - self.parallelogram_height_mm
        )
        return MechanismConfig(
            rcm_point_mm=rcm,
            limit_alpha=self.limit_alpha,
            limit_beta=self.limit_beta,
            insertion_range_mm=(self.d_min_mm, d_max),
            parallelogram_height_mm=float(parallelogram_height_mm),
            height_to_dmax_gain=self.height_to_dmax_gain,
        )


@dataclass(frozen=True, slots=True)
class LimitReport:
    """Per-axis admissibility with signed margins (limit - |angle|), radians."""

    alpha_ok: bool
    beta_ok: bool
    margin_alpha: float
    margin_beta: float

    @property
    def admissible(self) -> bool:
        return self.alpha_ok and self.beta_ok


@dataclass(frozen=True, slots=True)
class EndoscopePose:
    """Shaft pose through the remote center; tip = rcm + depth * direction."""

    rcm_point_mm: Vec3
    direction: Direction3
    depth_mm: float
    tip_mm: Vec3 = field(init=False)

    def __post_init__(self):
        tip = (
            self.rcm_point_mm[0] + self.depth_mm * self.direction.x,
            self.rcm_point_mm[1] + self.depth_mm * self.direction.y,
            self.rcm_point_mm[2] + self.depth_mm * self.direction.z,
        )
        object.__setattr__(self, "tip_mm", tip)


def check_limits(config: MechanismConfig, angles: OrientationAngles) -> LimitReport:
    """Signed joint-limit margins for a tilt pair; the boundary is admissible."""
    margin_alpha = config.limit_alpha - abs(angles.alpha)
    margin_beta = config.limit_beta - abs(angles.beta)
    return LimitReport(margin_alpha >= 0.0, margin_beta >= 0.0, margin_alpha, margin_beta)


def endoscope_pose(config: MechanismConfig, angles: OrientationAngles, depth_mm: float) -> EndoscopePose:
    """Pose of the endoscope for a tilt pair and insertion depth.

    Raises LimitViolation (naming each exceeded bound and by how much) or
    DepthOutOfRange.
    """
    report = check_limits(config, angles)
    violations = []
    if not report.alpha_ok:
        violations.append(("alpha", -report.margin_alpha))
    if not report.beta_ok:
        violations.append(("beta", -report.margin_beta))
    if violations:
        raise LimitViolation(violations)
    d_min, d_max = config.insertion_range_mm
    if not (d_min <= depth_mm <= d_max):
        raise DepthOutOfRange(depth_mm, d_min, d_max)
    return EndoscopePose(config.rcm_point_mm, direction_vector(angles), float(depth_mm))


def angles_from_target(config: MechanismConfig, target_mm) -> tuple[OrientationAngles, float]:
    """Tilt pair and insertion depth aiming the shaft at a world point.

    Joint limits are deliberately not enforced here; callers decide
    admissibility. Raises DegenerateTarget for targets at the remote center
    and DomainError for targets behind the remote-center plane (u_z <= 0).
    """
    delta = np.asarray(target_mm, dtype=float) - np.asarray(config.rcm_point_mm, dtype=float)
    depth = float(np.linalg.norm(delta))
    if depth < DEGENERATE_DEPTH_MM:
        raise DegenerateTarget(
            f"target within {DEGENERATE_DEPTH_MM:g} mm of the remote center"
        )
    u = delta / depth
    if u[2] <= 0.0:
        raise DomainError("target behind the remote-center plane (direction z <= 0)")
    beta = math.asin(min(1.0, max(-1.0, float(u[0]))))
    alpha = math.atan2(-float(u[1]), float(u[2]))
    return OrientationAngles(alpha, beta), depth
