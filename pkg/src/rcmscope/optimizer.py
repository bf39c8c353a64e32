"""Design optimization: place the remote center and size the parallelogram to
maximize anatomical coverage.

The objective is the reachable fraction over a target sample frozen once per
run (same seed and resolution for every evaluation), so it is a deterministic
function of the design variables. An optional weighted singularity-margin
bonus is available but defaults to off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import _reach_arrays
from .anatomy import sample_targets
from .errors import ConfigError, InfeasibleBounds
from .mechanism import MechanismConfig, Vec3

# downhill-simplex coefficients and stop rule, declared for reproducibility
SIMPLEX_REFLECT = 1.0
SIMPLEX_EXPAND = 2.0
SIMPLEX_CONTRACT = 0.5
SIMPLEX_SHRINK = 0.5
SIMPLEX_DIAMETER_TOL_MM = 0.01


@dataclass(frozen=True, slots=True)
class DesignVariables:
    """Optimized quantities: Cartesian RCM offset and parallelogram height."""

    rcm_offset_mm: Vec3
    parallelogram_height_mm: float


@dataclass(frozen=True, slots=True)
class DesignBounds:
    """Box bounds for the design variables plus the lattice density.

    Axes with lo == hi are held fixed; height_mm None fixes the height at the
    template value. grid_points is the lattice size per free axis.
    """

    offset_x_mm: tuple[float, float] = (0.0, 0.0)
    offset_y_mm: tuple[float, float] = (0.0, 0.0)
    offset_z_mm: tuple[float, float] = (0.0, 0.0)
    height_mm: tuple[float, float] | None = None
    grid_points: int = 3

    def __post_init__(self):
        for name in ("offset_x_mm", "offset_y_mm", "offset_z_mm", "height_mm"):
            pair = getattr(self, name)
            if pair is None:
                continue
            lo, hi = (float(pair[0]), float(pair[1]))
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InfeasibleBounds(f"{name}: bounds must be finite, got {pair!r}")
            if lo > hi:
                raise InfeasibleBounds(f"{name}: lower bound {lo:g} above upper bound {hi:g}")
            object.__setattr__(self, name, (lo, hi))
        if self.grid_points < 2:
            raise InfeasibleBounds(f"grid_points: must be >= 2, got {self.grid_points!r}")


@dataclass(frozen=True, slots=True)
class Evaluation:
    """One objective evaluation (0-based index in evaluation order)."""

    index: int
    variables: DesignVariables
    coverage: float


@dataclass(frozen=True)
class OptimizationReport:
    """Every evaluation in order, plus the best point found."""

    best: DesignVariables
    best_coverage: float
    history: tuple[Evaluation, ...]
    evaluations: int
    budget_exhausted: bool
    method: str

    def incumbents(self) -> tuple[Evaluation, ...]:
        """Running-best subsequence of the history (non-decreasing coverage)."""
        out = []
        best = -math.inf
        for ev in self.history:
            if ev.coverage > best:
                best = ev.coverage
                out.append(ev)
        return tuple(out)


class _BudgetSpent(Exception):
    pass


class _Objective:
    """Coverage objective over a frozen target set, with budget accounting."""

    def __init__(self, template: MechanismConfig, targets: np.ndarray, budget: int,
                 margin_weight: float):
        self.template = template
        self.targets = targets
        self.budget = budget
        self.margin_weight = margin_weight
        self.history: list[Evaluation] = []

    def __call__(self, variables: DesignVariables) -> float:
        if len(self.history) >= self.budget:
            raise _BudgetSpent
        try:
            config = self.template.with_design(variables.rcm_offset_mm,
                                               variables.parallelogram_height_mm)
            score = self._score(config)
        except ConfigError:
            # design collapses the insertion window: nothing is reachable
            score = 0.0
        self.history.append(Evaluation(len(self.history), variables, score))
        return score

    def _score(self, config: MechanismConfig) -> float:
        arrays = _reach_arrays(config, self.targets)
        score = float(arrays["reachable"].mean())
        if self.margin_weight != 0.0 and arrays["reachable"].any():
            # mean singularity margin over reachable targets, normalized by pi;
            # theta1 = alpha and theta2 follows from the tilt pair
            alpha = arrays["alpha"][arrays["reachable"]]
            beta = arrays["beta"][arrays["reachable"]]
            theta2 = np.arctan2(np.sin(beta), np.cos(alpha) * np.cos(beta))
            margin = math.pi - np.maximum(np.abs(alpha), np.abs(theta2))
            score += self.margin_weight * float(margin.mean()) / math.pi
        return score


def _axis_values(pair: tuple[float, float], grid_points: int) -> np.ndarray:
    lo, hi = pair
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, grid_points)


def _lattice(bounds: DesignBounds, template_height: float) -> list[DesignVariables]:
    height_pair = bounds.height_mm if bounds.height_mm is not None else (template_height,) * 2
    xs = _axis_values(bounds.offset_x_mm, bounds.grid_points)
    ys = _axis_values(bounds.offset_y_mm, bounds.grid_points)
    zs = _axis_values(bounds.offset_z_mm, bounds.grid_points)
    hs = _axis_values(height_pair, bounds.grid_points)
    points = []
    for x in xs:
        for y in ys:
            for z in zs:
                for h in hs:
                    points.append(DesignVariables((float(x), float(y), float(z)), float(h)))
    return points


def _as_vector(v: DesignVariables) -> np.ndarray:
    return np.array([*v.rcm_offset_mm, v.parallelogram_height_mm])


def _from_vector(x: np.ndarray) -> DesignVariables:
    return DesignVariables((float(x[0]), float(x[1]), float(x[2])), float(x[3]))


def _best_of(history) -> Evaluation:
    best = history[0]
    for ev in history[1:]:
        if ev.coverage > best.coverage:
            best = ev
    return best


def _nelder_mead(objective: _Objective, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 free: np.ndarray) -> bool:
    """Downhill-simplex maximization over the free axes, clipped to bounds.

    Returns True when the simplex diameter fell below
    SIMPLEX_DIAMETER_TOL_MM, False when the objective budget ran out first;
    evaluations accumulate in objective.history either way.
    """
    idx = np.flatnonzero(free)
    n = idx.size
    lo_f, hi_f = lo[idx], hi[idx]

    def evaluate(xf: np.ndarray) -> float:
        x = x0.copy()
        x[idx] = xf
        return -objective(_from_vector(x))  # maximize as minimization

    def clipped(xf: np.ndarray) -> np.ndarray:
        return np.clip(xf, lo_f, hi_f)

    # initial simplex: 10% of each free range, reflected inward at the bounds
    vertices = [x0[idx].astype(float)]
    for k in range(n):
        delta = 0.1 * (hi_f[k] - lo_f[k])
        vertex = vertices[0].copy()
        vertex[k] = vertex[k] + delta if vertex[k] + delta <= hi_f[k] else vertex[k] - delta
        vertices.append(vertex)
    try:
        values = [evaluate(v) for v in vertices]
        while True:
            order = np.argsort(np.array(values), kind="stable")
            vertices = [vertices[i] for i in order]
            values = [values[i] for i in order]
            diameter = max(
                float(np.linalg.norm(vertices[i] - vertices[j]))
                for i in range(n + 1)
                for j in range(i + 1, n + 1)
            )
            if diameter < SIMPLEX_DIAMETER_TOL_MM:
                return True
            centroid = np.mean(vertices[:-1], axis=0)
            worst = vertices[-1]
            reflected = clipped(centroid + SIMPLEX_REFLECT * (centroid - worst))
            f_reflected = evaluate(reflected)
            if f_reflected < values[0]:
                expanded = clipped(centroid + SIMPLEX_EXPAND * (reflected - centroid))
                f_expanded = evaluate(expanded)
                if f_expanded < f_reflected:
                    vertices[-1], values[-1] = expanded, f_expanded
                else:
                    vertices[-1], values[-1] = reflected, f_reflected
            elif f_reflected < values[-2]:
                vertices[-1], values[-1] = reflected, f_reflected
            else:
                if f_reflected < values[-1]:
                    contracted = clipped(centroid + SIMPLEX_CONTRACT * (reflected - centroid))
                else:
                    contracted = clipped(centroid - SIMPLEX_CONTRACT * (centroid - worst))
                f_contracted = evaluate(contracted)
                if f_contracted < min(f_reflected, values[-1]):
                    vertices[-1], values[-1] = contracted, f_contracted
                else:
                    best = vertices[0]
                    for i in range(1, n + 1):
                        vertices[i] = best + SIMPLEX_SHRINK * (vertices[i] - best)
                        values[i] = evaluate(vertices[i])
    except _BudgetSpent:
        return False


def optimize(template: MechanismConfig, workspace, bounds: DesignBounds,
             method: str = "grid", budget: int = 100, seed: int = 0,
             step_mm: float | None = None, count: int | None = None,
             margin_weight: float = 0.0) -> OptimizationReport:
    """Maximize coverage over the design bounds.

    'grid' evaluates the declared lattice exhaustively (stopping at the
    budget); 'simplex' refines from the best lattice point with the
    downhill-simplex rule. Fixed seed, resolution, and budget reproduce the
    report exactly.
    """
    if method not in ("grid", "simplex"):
        raise ValueError(f"method must be 'grid' or 'simplex', got {method!r}")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget!r}")

    targets = sample_targets(workspace, step_mm=step_mm, count=count, seed=seed)
    objective = _Objective(template, targets, budget, margin_weight)

    lattice = _lattice(bounds, template.parallelogram_height_mm)
    exhausted = False
    try:
        for point in lattice:
            objective(point)
    except _BudgetSpent:
        exhausted = True

    if method == "simplex" and not exhausted:
        best = _best_of(objective.history)
        height_pair = bounds.height_mm if bounds.height_mm is not None else \
            (template.parallelogram_height_mm,) * 2
        lo = np.array([bounds.offset_x_mm[0], bounds.offset_y_mm[0], bounds.offset_z_mm[0],
                       height_pair[0]])
        hi = np.array([bounds.offset_x_mm[1], bounds.offset_y_mm[1], bounds.offset_z_mm[1],
                       height_pair[1]])
        free = hi > lo
        if free.any():
            if len(objective.history) >= budget:
                exhausted = True
            else:
                converged = _nelder_mead(objective, _as_vector(best.variables), lo, hi, free)
                exhausted = not converged

    best = _best_of(objective.history)
    return OptimizationReport(
        best=best.variables,
        best_coverage=best.coverage,
        history=tuple(objective.history),
        evaluations=len(objective.history),
        budget_exhausted=exhausted,
        method=method,
    )


def sensitivity(template: MechanismConfig, workspace, variable: str, deltas,
                step_mm: float | None = None, count: int | None = None,
                seed: int = 0) -> list[tuple[float, float]]:
    """One-at-a-time coverage curve for a single design variable.

    variable: 'x', 'y', 'z' (RCM offset axes, mm) or 'height' (mm delta on the
    parallelogram height). Targets are frozen once across all deltas.
    """
    axes = {"x": 0, "y": 1, "z": 2, "height": 3}
    if variable not in axes:
        raise ValueError(f"variable must be one of {sorted(axes)}, got {variable!r}")
    targets = sample_targets(workspace, step_mm=step_mm, count=count, seed=seed)
    objective = _Objective(template, targets, budget=len(list(deltas)) + 1, margin_weight=0.0)
    curve = []
    for delta in deltas:
        offset = [0.0, 0.0, 0.0]
        height = template.parallelogram_height_mm
        if variable == "height":
            height += float(delta)
        else:
            offset[axes[variable]] = float(delta)
        score = objective(DesignVariables(tuple(offset), height))
        curve.append((float(delta), score))
    return curve
