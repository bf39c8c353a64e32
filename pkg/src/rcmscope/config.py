"""Flat key = value configuration files for the CLI.

One ``key = value`` per line; vectors and bound pairs are comma-separated
numbers; blank lines and lines starting with '#' are ignored. Angles are
given in degrees at this boundary and converted to radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .mechanism import MechanismConfig
from .optimizer import DesignBounds

REQUIRED_KEYS = (
    "rcm_point_mm",
    "limit_alpha_deg",
    "limit_beta_deg",
    "insertion_min_mm",
    "insertion_max_mm",
    "parallelogram_height_mm",
)

OPTIONAL_KEYS = (
    "height_to_dmax_gain",
    "offset_bounds_x_mm",
    "offset_bounds_y_mm",
    "offset_bounds_z_mm",
    "height_bounds_mm",
    "grid_points_per_axis",
    "optimizer_method",
    "optimizer_budget",
    "margin_weight",
)

KNOWN_KEYS = frozenset(REQUIRED_KEYS) | frozenset(OPTIONAL_KEYS)


@dataclass(frozen=True)
class RunSettings:
    """Everything the CLI needs: device config plus optimizer settings."""

    mechanism: MechanismConfig
    bounds: DesignBounds
    method: str
    budget: int
    margin_weight: float


def _parse_float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {raw!r}")
    return value


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse integer {raw!r}") from None


def _parse_tuple(key: str, raw: str, length: int) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != length:
        raise ConfigError(f"{key}: expected {length} comma-separated numbers, got {raw!r}")
    return tuple(_parse_float(key, p) for p in parts)


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key -> value mapping; rejects unknown and duplicate keys."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        if key in raw:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        raw[key] = value.strip()
    return raw


def settings_from_text(text: str) -> RunSettings:
    """Parse and validate a configuration file's content."""
    raw = parse_config_text(text)
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"{missing[0]}: required key missing")

    rcm = _parse_tuple("rcm_point_mm", raw["rcm_point_mm"], 3)
    limit_alpha_deg = _parse_float("limit_alpha_deg", raw["limit_alpha_deg"])
    limit_beta_deg = _parse_float("limit_beta_deg", raw["limit_beta_deg"])
    for key, value in (("limit_alpha_deg", limit_alpha_deg), ("limit_beta_deg", limit_beta_deg)):
        if not (0.0 < value < 90.0):
            raise ConfigError(f"{key}: must lie in (0, 90) degrees, got {value:g}")
    d_min = _parse_float("insertion_min_mm", raw["insertion_min_mm"])
    d_max = _parse_float("insertion_max_mm", raw["insertion_max_mm"])
    if not (0.0 <= d_min < d_max):
        raise ConfigError(
            f"insertion_min_mm/insertion_max_mm: need 0 <= min < max, got {d_min:g}, {d_max:g}"
        )
    height = _parse_float("parallelogram_height_mm", raw["parallelogram_height_mm"])
    if height <= 0:
        raise ConfigError(f"parallelogram_height_mm: must be > 0, got {height:g}")
    gain = _parse_float("height_to_dmax_gain", raw.get("height_to_dmax_gain", "1.0"))

    mechanism = MechanismConfig(
        rcm_point_mm=rcm,
        limit_alpha=math.radians(limit_alpha_deg),
        limit_beta=math.radians(limit_beta_deg),
        insertion_range_mm=(d_min, d_max),
        parallelogram_height_mm=height,
        height_to_dmax_gain=gain,
    )

    def bound_pair(key: str) -> tuple[float, float] | None:
        if key not in raw:
            return None
        return _parse_tuple(key, raw[key], 2)  # type: ignore[return-value]

    bounds = DesignBounds(
        offset_x_mm=bound_pair("offset_bounds_x_mm") or (0.0, 0.0),
        offset_y_mm=bound_pair("offset_bounds_y_mm") or (0.0, 0.0),
        offset_z_mm=bound_pair("offset_bounds_z_mm") or (0.0, 0.0),
        height_mm=bound_pair("height_bounds_mm"),
        grid_points=_parse_int("grid_points_per_axis", raw.get("grid_points_per_axis", "3")),
    )

    method = raw.get("optimizer_method", "grid")
    if method not in ("grid", "simplex"):
        raise ConfigError(f"optimizer_method: must be 'grid' or 'simplex', got {method!r}")
    budget = _parse_int("optimizer_budget", raw.get("optimizer_budget", "100"))
    if budget < 1:
        raise ConfigError(f"optimizer_budget: must be >= 1, got {budget}")
    margin_weight = _parse_float("margin_weight", raw.get("margin_weight", "0.0"))

    return RunSettings(mechanism, bounds, method, budget, margin_weight)


def load_settings(path) -> RunSettings:
    """Read and validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path!r}: {exc}") from None
    return settings_from_text(text)
