"""Kinematics of the two-axis spherical wrist that orients the endoscope shaft.

Conventions: angles are radians, the neutral shaft direction is +z, ``alpha``
tilts about x and ``beta`` about y. The two actuated joints are ``theta1``
(shaft orientation about the axis) and ``theta2`` (parallelogram inclination).
The working domain is the open square (-pi/2, pi/2)^2 for both angle pairs;
the mechanism's singular conditions |theta_i| = pi lie far outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# cos() values at or below this are treated as degenerate (direction in the
# wrist's unreachable half-plane); fail loudly instead of returning huge angles
COS_DEGENERACY_TOL = 1e-9

# central-difference step for the dexterity Jacobian
FD_STEP = 1e-6

_HALF_PI = math.pi / 2.0
_TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap a finite angle into (-pi, pi]."""
    a = math.fmod(angle, _TWO_PI)
    if a > math.pi:
        a -= _TWO_PI
    elif a <= -math.pi:
        a += _TWO_PI
    return a


@dataclass(frozen=True, slots=True)
class OrientationAngles:
    """Tilt pair (alpha about x, beta about y) defining the shaft direction.

    Normalized to (-pi, pi] at construction so equal orientations compare equal.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise DomainError("orientation angles must be finite")
        object.__setattr__(self, "alpha", wrap_angle(float(self.alpha)))
        object.__setattr__(self, "beta", wrap_angle(float(self.beta)))


@dataclass(frozen=True, slots=True)
class JointAngles:
    """Actuated angles of the two base revolute joints, normalized to (-pi, pi]."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise DomainError("joint angles must be finite")
        object.__setattr__(self, "theta1", wrap_angle(float(self.theta1)))
        object.__setattr__(self, "theta2", wrap_angle(float(self.theta2)))


@dataclass(frozen=True, slots=True)
class Direction3:
    """Unit vector giving the endoscope shaft direction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(norm) or abs(norm - 1.0) > 1e-12:
            raise DomainError(f"direction must have unit norm, got {norm!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def direction_vector(angles: OrientationAngles) -> Direction3:
    """Shaft direction for a tilt pair: (sin b, -sin a cos b, cos a cos b)."""
    sa, ca = math.sin(angles.alpha), math.cos(angles.alpha)
    sb, cb = math.sin(angles.beta), math.cos(angles.beta)
    return Direction3(sb, -sa * cb, ca * cb)


def inverse_kinematics(angles: OrientationAngles) -> JointAngles:
    """Joint angles realizing a tilt pair.

    Quadrant-safe form of the ratio equations:
    theta1 = -atan2(-sin a, cos a), theta2 = -atan2(-sin b, cos a cos b).
    On the working square this reduces to theta1 = alpha.

    Raises DomainError when cos(alpha) or cos(beta) is at or below the
    degeneracy tolerance (orientation too close to +-90 deg).
    """
    sa, ca = math.sin(angles.alpha), math.cos(angles.alpha)
    sb, cb = math.sin(angles.beta), math.cos(angles.beta)
    if ca <= COS_DEGENERACY_TOL:
        raise DomainError(
            f"cos(alpha) <= {COS_DEGENERACY_TOL:g}: alpha too close to +-90 deg"
        )
    if cb <= COS_DEGENERACY_TOL:
        raise DomainError(
            f"cos(beta) <= {COS_DEGENERACY_TOL:g}: beta too close to +-90 deg"
        )
    theta1 = -math.atan2(-sa, ca)
    theta2 = -math.atan2(-sb, ca * cb)
    return JointAngles(theta1, theta2)


def forward_kinematics(joints: JointAngles) -> OrientationAngles:
    """Tilt pair realized by joint angles; analytic inverse of inverse_kinematics.

    alpha = theta1, beta = atan(tan theta2 * cos theta1), valid on the open
    square |theta1|, |theta2| < pi/2 (DomainError outside).
    """
    t1, t2 = joints.theta1, joints.theta2
    if abs(t1) >= _HALF_PI:
        raise DomainError(f"|theta1| must be below 90 deg, got {math.degrees(t1):.6f} deg")
    if abs(t2) >= _HALF_PI:
        raise DomainError(f"|theta2| must be below 90 deg, got {math.degrees(t2):.6f} deg")
    return OrientationAngles(t1, math.atan(math.tan(t2) * math.cos(t1)))


def singularity_margin(joints: JointAngles) -> float:
    """Angular distance to the nearest singular condition |theta_i| = pi.

    min(pi - |theta1|, pi - |theta2|): zero exactly at a singular
    configuration, pi at the isotropic posture (0, 0).
    """
    return min(math.pi - abs(joints.theta1), math.pi - abs(joints.theta2))


def dexterity(joints: JointAngles, step: float = FD_STEP) -> float:
    """2-norm condition number of the orientation Jacobian d(alpha,beta)/d(theta).

    Central finite differences with the given step; equals 1 at the isotropic
    posture (0, 0). Raises DomainError when the stencil leaves the
    forward-kinematics domain.
    """
    t1, t2 = joints.theta1, joints.theta2
    if abs(t1) + step >= _HALF_PI or abs(t2) + step >= _HALF_PI:
        raise DomainError("finite-difference stencil leaves the forward-kinematics domain")

    def fk(a: float, b: float) -> np.ndarray:
        o = forward_kinematics(JointAngles(a, b))
        return np.array([o.alpha, o.beta])

    col1 = (fk(t1 + step, t2) - fk(t1 - step, t2)) / (2.0 * step)
    col2 = (fk(t1, t2 + step) - fk(t1, t2 - step)) / (2.0 * step)
    jac = np.column_stack([col1, col2])
    return float(np.linalg.cond(jac, 2))
