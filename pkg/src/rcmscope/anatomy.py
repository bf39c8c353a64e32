"""Anatomical target-workspace models: scan-measurement ingestion, column
statistics, and the schematic ear / sinus regions with deterministic samplers.

The bundled datasets (ear: 16 petrous-bone scans, sinus: 23 paranasal scans)
are transcribed with semicolon separators and comma decimals, as printed in
the source tables; the parser also accepts comma-separated, dot-decimal files.
Aggregate footer rows labelled "Average" / "sigma" are kept apart from the
data records so the printed values can be audited against recomputation.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import EmptyInput, NegativeLength, ParseError, ResolutionTooCoarse

Vec3 = tuple[float, float, float]

EAR_COLUMNS = (
    "age",
    "cae_diameter_lateral_mm",
    "cae_diameter_sulcus_mm",
    "cae_length_mm",
    "om_height_mm",
    "om_width_mm",
    "om_ap_length_mm",
)

SINUS_COLUMNS = (
    "age",
    "piriform_posterior_mm",
    "right_lateral_septum_mm",
    "left_lateral_septum_mm",
    "floor_roof_mm",
    "right_meatus_septum_mm",
    "left_meatus_septum_mm",
    "piriform_height_mm",
)

_BUNDLED_FILES = {"ear": "table1_ear.csv", "sinus": "table2_sinus.csv"}

_AGGREGATE_LABELS = {"average": "average", "σ": "sigma", "sigma": "sigma"}

# Reporting convention for the standard deviation. The bundled sinus table's
# printed sigma row matches the (n-1) sample convention within 0.005 on every
# column, while the population convention misses by up to 0.5; "sample" is
# therefore the fixed default. Both values stay available on ColumnStats.
SIGMA_CONVENTION = "sample"


def _validate_record(record):
    for f in fields(record):
        value = getattr(record, f.name)
        if not math.isfinite(value):
            raise ParseError(f"non-finite value {value!r}", column=f.name)
        if f.name == "age":
            if value < 0:
                raise ParseError(f"age must be >= 0, got {value!r}", column=f.name)
        elif value <= 0:
            raise NegativeLength(f"length must be > 0, got {value!r}", column=f.name)


@dataclass(frozen=True, slots=True)
class EarMeasurement:
    """One petrous-bone scan row: canal and middle-ear dimensions in mm."""

    age: float
    cae_diameter_lateral_mm: float
    cae_diameter_sulcus_mm: float
    cae_length_mm: float
    om_height_mm: float
    om_width_mm: float
    om_ap_length_mm: float

    def __post_init__(self):
        _validate_record(self)


@dataclass(frozen=True, slots=True)
class SinusMeasurement:
    """One paranasal-sinus scan row: nasal-cavity extents in mm."""

    age: float
    piriform_posterior_mm: float
    right_lateral_septum_mm: float
    left_lateral_septum_mm: float
    floor_roof_mm: float
    right_meatus_septum_mm: float
    left_meatus_septum_mm: float
    piriform_height_mm: float

    def __post_init__(self):
        _validate_record(self)


_KINDS = {
    "ear": (EAR_COLUMNS, EarMeasurement),
    "sinus": (SINUS_COLUMNS, SinusMeasurement),
}


@dataclass(frozen=True)
class ParsedTable:
    """Measurement records plus any printed aggregate footer rows."""

    kind: str
    records: tuple
    printed_average: dict | None
    printed_sigma: dict | None


def _parse_cell(cell: str, decimal_comma: bool, row: int, column: str) -> float:
    text = cell.strip()
    if decimal_comma:
        text = text.replace(",", ".")
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"cannot parse number {cell.strip()!r}", row=row, column=column) from None


def parse_measurements(text: str, kind: str) -> ParsedTable:
    """Parse a measurement CSV (header required, exact column names).

    Field separator is auto-detected (';' or ','); comma decimals are accepted
    with the semicolon separator. Footer rows labelled Average / sigma are
    returned separately as printed aggregates, not as records.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {sorted(_KINDS)}, got {kind!r}")
    columns, record_type = _KINDS[kind]

    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise ParseError("empty file: header row required")

    header_row, header_line = lines[0]
    sep = ";" if ";" in header_line else ","
    decimal_comma = sep == ";"
    header = tuple(c.strip() for c in header_line.split(sep))
    if header != columns:
        raise ParseError(
            f"header mismatch for kind {kind!r}: expected {sep.join(columns)!r}",
            row=header_row,
        )

    records = []
    printed: dict[str, dict] = {}
    for row, line in lines[1:]:
        cells = [c for c in line.split(sep)]
        label = _AGGREGATE_LABELS.get(cells[0].strip().lower())
        if label is not None:
            values = [c for c in cells[1:] if c.strip()]
            if len(values) == len(columns):
                cols = columns
            elif len(values) == len(columns) - 1:
                cols = columns[1:]  # footer without an age aggregate
            else:
                raise ParseError(
                    f"aggregate row has {len(values)} values for {len(columns)} columns",
                    row=row,
                )
            printed[label] = {
                col: _parse_cell(cell, decimal_comma, row, col) for col, cell in zip(cols, values)
            }
            continue
        if len(cells) != len(columns):
            raise ParseError(
                f"expected {len(columns)} fields, got {len(cells)}", row=row
            )
        values = {
            col: _parse_cell(cell, decimal_comma, row, col) for col, cell in zip(columns, cells)
        }
        try:
            records.append(record_type(**values))
        except (ParseError, NegativeLength) as exc:
            raise type(exc)(exc.message, row=row, column=exc.column) from None

    return ParsedTable(
        kind=kind,
        records=tuple(records),
        printed_average=printed.get("average"),
        printed_sigma=printed.get("sigma"),
    )


def serialize_measurements(records, kind: str) -> str:
    """Render records back to CSV (semicolon separator, dot decimals).

    parse_measurements(serialize_measurements(records)) returns equal records.
    """
    columns, _ = _KINDS[kind]
    lines = [";".join(columns)]
    for record in records:
        lines.append(";".join(repr(float(getattr(record, col))) for col in columns))
    return "\n".join(lines) + "\n"


def load_bundled_table(kind: str) -> ParsedTable:
    """Parse the measurement table shipped inside the package."""
    name = _BUNDLED_FILES[kind]
    text = (importlib.resources.files("rcmscope") / "data" / name).read_text(encoding="utf-8")
    return parse_measurements(text, kind)


# ---------------------------------------------------------------------------
# Column statistics


@dataclass(frozen=True, slots=True)
class ColumnStats:
    """Mean and standard deviation of one column, under both sigma conventions."""

    mean: float
    sigma_population: float
    sigma_sample: float
    n: int

    @property
    def sigma(self) -> float:
        return self.sigma_sample if SIGMA_CONVENTION == "sample" else self.sigma_population


def column_stats(records, column: str) -> ColumnStats:
    """Arithmetic mean and both sigma conventions for one measurement column.

    A single record yields sigma 0 under both conventions.
    """
    values = [float(getattr(r, column)) for r in records]
    n = len(values)
    if n == 0:
        raise EmptyInput(f"no records to aggregate for column {column!r}")
    mean = math.fsum(values) / n
    ss = math.fsum((v - mean) ** 2 for v in values)
    sigma_population = math.sqrt(ss / n)
    sigma_sample = math.sqrt(ss / (n - 1)) if n > 1 else 0.0
    return ColumnStats(mean, sigma_population, sigma_sample, n)


def stats_table(records, kind: str) -> dict[str, ColumnStats]:
    """Column statistics for every column of a measurement kind, in table order."""
    columns, _ = _KINDS[kind]
    return {col: column_stats(records, col) for col in columns}


@dataclass(frozen=True, slots=True)
class AggregateDiff:
    """Recomputed-versus-printed comparison for one column aggregate."""

    column: str
    recomputed: float
    printed: float
    diff: float


def diff_against_printed(stats: dict[str, ColumnStats], printed: dict, which: str = "mean"):
    """Compare recomputed aggregates against a printed footer row.

    which: 'mean' or 'sigma' (sigma uses the fixed reporting convention).
    Columns absent from the printed row are skipped.
    """
    if which not in ("mean", "sigma"):
        raise ValueError(f"which must be 'mean' or 'sigma', got {which!r}")
    diffs = []
    for column, st in stats.items():
        if column not in printed:
            continue
        recomputed = st.mean if which == "mean" else st.sigma
        diffs.append(AggregateDiff(column, recomputed, printed[column], recomputed - printed[column]))
    return diffs


# ---------------------------------------------------------------------------
# Workspace geometry

_STATISTICS = ("mean", "min", "max")


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise NegativeLength(f"{name} must be > 0, got {value!r}")
    return value


@dataclass(frozen=True, slots=True)
class EarWorkspace:
    """Ear target region: canal cylinder along +z from the remote center at
    the canal entrance, plus the middle-ear box past the medial end.

    The box is centered on the canal axis (no lateral-offset data exists);
    its anteroposterior depth extends the region along +z, width spans x and
    height spans y.
    """

    canal_length_mm: float
    canal_radius_mm: float
    cavity_height_mm: float
    cavity_width_mm: float
    cavity_ap_depth_mm: float
    origin_mm: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in (
            "canal_length_mm",
            "canal_radius_mm",
            "cavity_height_mm",
            "cavity_width_mm",
            "cavity_ap_depth_mm",
        ):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        object.__setattr__(self, "origin_mm", tuple(float(v) for v in self.origin_mm))

    def contains(self, point_mm, tol: float = 1e-9) -> bool:
        """Point membership in the cylinder-or-box union (closed regions)."""
        x = float(point_mm[0]) - self.origin_mm[0]
        y = float(point_mm[1]) - self.origin_mm[1]
        z = float(point_mm[2]) - self.origin_mm[2]
        in_canal = (
            -tol <= z <= self.canal_length_mm + tol
            and x * x + y * y <= self.canal_radius_mm**2 + tol
        )
        in_cavity = (
            abs(x) <= self.cavity_width_mm / 2.0 + tol
            and abs(y) <= self.cavity_height_mm / 2.0 + tol
            and self.canal_length_mm - tol <= z <= self.canal_length_mm + self.cavity_ap_depth_mm + tol
        )
        return in_canal or in_cavity


@dataclass(frozen=True, slots=True)
class SinusWorkspace:
    """Nasal / paranasal target region: a box from the piriform entrance
    (remote-center site) back to the posterior wall.

    The septum plane is x = 0; with the septum intact only the right cavity
    (x >= 0) is modeled, removing it opens the full left+right width. The
    remote center sits at the vertical middle of the entrance, so the floor
    lies at -entrance_height/2 and the roof at floor + floor_to_roof. The
    triangular maxillary recesses are absorbed into the bounding box.
    """

    sagittal_depth_mm: float
    right_halfwidth_mm: float
    left_halfwidth_mm: float
    floor_to_roof_mm: float
    entrance_height_mm: float
    septum_removed: bool = False
    origin_mm: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in (
            "sagittal_depth_mm",
            "right_halfwidth_mm",
            "left_halfwidth_mm",
            "floor_to_roof_mm",
            "entrance_height_mm",
        ):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        object.__setattr__(self, "origin_mm", tuple(float(v) for v in self.origin_mm))

    @property
    def x_bounds_mm(self) -> tuple[float, float]:
        lo = -self.left_halfwidth_mm if self.septum_removed else 0.0
        return (lo, self.right_halfwidth_mm)

    @property
    def y_bounds_mm(self) -> tuple[float, float]:
        floor = -self.entrance_height_mm / 2.0
        return (floor, floor + self.floor_to_roof_mm)

    @property
    def z_bounds_mm(self) -> tuple[float, float]:
        return (0.0, self.sagittal_depth_mm)

    def contains(self, point_mm, tol: float = 1e-9) -> bool:
        x = float(point_mm[0]) - self.origin_mm[0]
        y = float(point_mm[1]) - self.origin_mm[1]
        z = float(point_mm[2]) - self.origin_mm[2]
        (x_lo, x_hi), (y_lo, y_hi), (z_lo, z_hi) = (
            self.x_bounds_mm,
            self.y_bounds_mm,
            self.z_bounds_mm,
        )
        return (
            x_lo - tol <= x <= x_hi + tol
            and y_lo - tol <= y <= y_hi + tol
            and z_lo - tol <= z <= z_hi + tol
        )


def _statistic_picker(records, statistic: str):
    if statistic not in _STATISTICS:
        raise ValueError(f"statistic must be one of {_STATISTICS}, got {statistic!r}")
    if not records:
        raise EmptyInput("no records to build a workspace from")

    def pick(column: str) -> float:
        values = [float(getattr(r, column)) for r in records]
        if statistic == "mean":
            return math.fsum(values) / len(values)
        return min(values) if statistic == "min" else max(values)

    return pick


def ear_workspace(records, statistic: str = "mean", radius_from: str = "sulcus",
                  origin_mm: Vec3 = (0.0, 0.0, 0.0)) -> EarWorkspace:
    """Schematic ear region from dataset statistics (mean / min / max envelope).

    radius_from selects which canal diameter sets the cylinder radius:
    'sulcus' (default) or 'lateral'.
    """
    diameter_columns = {
        "sulcus": "cae_diameter_sulcus_mm",
        "lateral": "cae_diameter_lateral_mm",
    }
    if radius_from not in diameter_columns:
        raise ValueError(f"radius_from must be one of {sorted(diameter_columns)}, got {radius_from!r}")
    pick = _statistic_picker(records, statistic)
    return EarWorkspace(
        canal_length_mm=pick("cae_length_mm"),
        canal_radius_mm=pick(diameter_columns[radius_from]) / 2.0,
        cavity_height_mm=pick("om_height_mm"),
        cavity_width_mm=pick("om_width_mm"),
        cavity_ap_depth_mm=pick("om_ap_length_mm"),
        origin_mm=origin_mm,
    )


def sinus_workspace(records, statistic: str = "mean", septum_removed: bool = False,
                    origin_mm: Vec3 = (0.0, 0.0, 0.0)) -> SinusWorkspace:
    """Schematic sinus region from dataset statistics (mean / min / max envelope)."""
    pick = _statistic_picker(records, statistic)
    return SinusWorkspace(
        sagittal_depth_mm=pick("piriform_posterior_mm"),
        right_halfwidth_mm=pick("right_lateral_septum_mm"),
        left_halfwidth_mm=pick("left_lateral_septum_mm"),
        floor_to_roof_mm=pick("floor_roof_mm"),
        entrance_height_mm=pick("piriform_height_mm"),
        septum_removed=septum_removed,
        origin_mm=origin_mm,
    )


# ---------------------------------------------------------------------------
# Deterministic target sampling

_MIN_SAMPLE_POINTS = 8
_GRID_EPS = 1e-9


def _axis_count(extent: float, step: float) -> int:
    return int(math.floor(extent / step + _GRID_EPS)) + 1


def box_grid(lower, upper, step_mm: float, skip_first_z: bool = False) -> np.ndarray:
    """Regular grid over a closed box, anchored at the lower corner.

    Positions along each axis are lower + k*step while they fit; every axis
    must yield at least two positions (ResolutionTooCoarse otherwise).
    skip_first_z drops the z = lower plane (used for regions whose entrance
    face sits on the remote-center plane).
    """
    if step_mm <= 0:
        raise ValueError(f"step_mm must be > 0, got {step_mm!r}")
    axes = []
    for i, (lo, hi) in enumerate(zip(lower, upper)):
        n = _axis_count(float(hi) - float(lo), step_mm)
        if n < 2:
            raise ResolutionTooCoarse(
                f"axis {'xyz'[i]} spans {float(hi) - float(lo):.6g} mm, below step {step_mm:g} mm"
            )
        start = 1 if (skip_first_z and i == 2) else 0
        axes.append(float(lo) + np.arange(start, n) * step_mm)
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def _cylinder_grid(length: float, radius: float, step: float) -> np.ndarray:
    """Rejection-free cylinder grid: rings of ceil(2*pi*j) points at radius
    j*step on planes z = k*step (k >= 1; the entrance plane is excluded)."""
    n_planes = int(math.floor(length / step + _GRID_EPS))
    n_rings = int(math.floor(radius / step + _GRID_EPS))
    if n_planes < 2:
        raise ResolutionTooCoarse(
            f"canal length {length:.6g} mm yields {n_planes} sampling plane(s) at step {step:g} mm"
        )
    if n_rings < 1:
        raise ResolutionTooCoarse(
            f"canal radius {radius:.6g} mm is below step {step:g} mm"
        )
    ring_xy = [np.array([[0.0, 0.0]])]
    for j in range(1, n_rings + 1):
        rho = j * step
        m = int(math.ceil(2.0 * math.pi * j))
        phi = 2.0 * math.pi * np.arange(m) / m
        ring_xy.append(np.column_stack([rho * np.cos(phi), rho * np.sin(phi)]))
    plane_xy = np.concatenate(ring_xy)
    points = []
    for k in range(1, n_planes + 1):
        z = np.full((plane_xy.shape[0], 1), k * step)
        points.append(np.hstack([plane_xy, z]))
    return np.concatenate(points)


def _grid_targets(workspace, step_mm: float) -> np.ndarray:
    if isinstance(workspace, EarWorkspace):
        canal = _cylinder_grid(workspace.canal_length_mm, workspace.canal_radius_mm, step_mm)
        half_w = workspace.cavity_width_mm / 2.0
        half_h = workspace.cavity_height_mm / 2.0
        cavity = box_grid(
            (-half_w, -half_h, workspace.canal_length_mm),
            (half_w, half_h, workspace.canal_length_mm + workspace.cavity_ap_depth_mm),
            step_mm,
        )
        return np.concatenate([canal, cavity])
    if isinstance(workspace, SinusWorkspace):
        (x_lo, x_hi) = workspace.x_bounds_mm
        (y_lo, y_hi) = workspace.y_bounds_mm
        (z_lo, z_hi) = workspace.z_bounds_mm
        return box_grid((x_lo, y_lo, z_lo), (x_hi, y_hi, z_hi), step_mm, skip_first_z=True)
    raise TypeError(f"unsupported workspace type {type(workspace).__name__}")


def _random_targets(workspace, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(workspace, EarWorkspace):
        v_canal = math.pi * workspace.canal_radius_mm**2 * workspace.canal_length_mm
        v_cavity = (
            workspace.cavity_width_mm * workspace.cavity_height_mm * workspace.cavity_ap_depth_mm
        )
        in_canal = rng.random(count) < v_canal / (v_canal + v_cavity)
        u = rng.random((count, 3))
        rho = workspace.canal_radius_mm * np.sqrt(u[:, 0])
        phi = 2.0 * math.pi * u[:, 1]
        canal = np.column_stack(
            [rho * np.cos(phi), rho * np.sin(phi), workspace.canal_length_mm * u[:, 2]]
        )
        v = rng.random((count, 3))
        cavity = np.column_stack(
            [
                workspace.cavity_width_mm * (v[:, 0] - 0.5),
                workspace.cavity_height_mm * (v[:, 1] - 0.5),
                workspace.canal_length_mm + workspace.cavity_ap_depth_mm * v[:, 2],
            ]
        )
        return np.where(in_canal[:, None], canal, cavity)
    if isinstance(workspace, SinusWorkspace):
        (x_lo, x_hi) = workspace.x_bounds_mm
        (y_lo, y_hi) = workspace.y_bounds_mm
        (z_lo, z_hi) = workspace.z_bounds_mm
        u = rng.random((count, 3))
        return np.column_stack(
            [
                x_lo + (x_hi - x_lo) * u[:, 0],
                y_lo + (y_hi - y_lo) * u[:, 1],
                z_lo + (z_hi - z_lo) * u[:, 2],
            ]
        )
    raise TypeError(f"unsupported workspace type {type(workspace).__name__}")


def sample_targets(workspace, step_mm: float | None = None, count: int | None = None,
                   seed: int = 0) -> np.ndarray:
    """Deterministic target points (N, 3) in mm inside an anatomical workspace.

    Exactly one of step_mm (regular grid) or count (uniform random, seeded)
    must be given. Grid planes on the remote-center entrance plane (z = 0)
    are excluded: the shaft pivots there, so they can never be aimed at.
    Identical arguments always return a bitwise-identical array.
    """
    if (step_mm is None) == (count is None):
        raise ValueError("exactly one of step_mm or count must be given")
    if step_mm is not None:
        points = _grid_targets(workspace, float(step_mm))
    else:
        if count < _MIN_SAMPLE_POINTS:
            raise ResolutionTooCoarse(
                f"count {count} is below the minimum of {_MIN_SAMPLE_POINTS} points"
            )
        points = _random_targets(workspace, int(count), np.random.default_rng(seed))
    if points.shape[0] < _MIN_SAMPLE_POINTS:
        raise ResolutionTooCoarse(
            f"sampling produced {points.shape[0]} points, below the minimum of {_MIN_SAMPLE_POINTS}"
        )
    return points + np.asarray(workspace.origin_mm, dtype=float)
