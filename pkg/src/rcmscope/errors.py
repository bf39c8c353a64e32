"""Exception types shared across the toolkit."""


class RcmScopeError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RcmScopeError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class LimitViolation(RcmScopeError):
    """Requested orientation exceeds one or both joint limits."""

    def __init__(self, violations):
        # violations: sequence of (axis_name, deficit_rad), deficit > 0
        self.violations = tuple(violations)
        detail = ", ".join(
            f"{axis} limit exceeded by {deficit:.6g} rad" for axis, deficit in self.violations
        )
        super().__init__(detail)


class DepthOutOfRange(RcmScopeError):
    """Insertion depth falls outside the configured window."""

    def __init__(self, depth_mm, d_min_mm, d_max_mm):
        self.depth_mm = depth_mm
        self.d_min_mm = d_min_mm
        self.d_max_mm = d_max_mm
        super().__init__(
            f"insertion depth {depth_mm:.6g} mm outside [{d_min_mm:.6g}, {d_max_mm:.6g}] mm"
        )


class DegenerateTarget(RcmScopeError):
    """Target point coincides with the remote center."""


class DataError(RcmScopeError):
    """Base class for measurement-data problems (CLI exit 65)."""


class _LocatedDataError(DataError):
    """Data error that can carry a row/column location."""

    def __init__(self, message, row=None, column=None):
        self.message = message
        self.row = row
        self.column = column
        loc = ""
        if row is not None or column is not None:
            where = ", ".join(
                part
                for part in (
                    f"row {row}" if row is not None else "",
                    f"column '{column}'" if column else "",
                )
                if part
            )
            loc = f" ({where})"
        super().__init__(message + loc)


class ParseError(_LocatedDataError):
    """Malformed measurement file."""


class NegativeLength(_LocatedDataError):
    """A length cell is zero or negative."""


class EmptyInput(DataError):
    """An operation that needs at least one record received none."""


class ResolutionTooCoarse(DataError):
    """Sampling resolution yields too few target points."""


class ConfigError(RcmScopeError):
    """Invalid configuration value; message names the offending field."""


class InfeasibleBounds(ConfigError):
    """Optimizer bounds are empty (lower bound above upper bound)."""
