"""Command-line interface: kinematics queries, dataset statistics, workspace
maps, coverage, span, and design optimization.

Angles are degrees at this boundary (radians internally). Report commands
write delimited output plus a rendered figure alongside it; all file writes
are atomic (temp file + rename) and byte-deterministic for fixed flags.

Exit codes: 0 ok, 2 kinematic-domain error, 64 usage, 65 data, 78 config.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

from . import analysis, anatomy, optimizer, plotting
from .config import load_settings
from .errors import (
    ConfigError,
    DataError,
    DegenerateTarget,
    DepthOutOfRange,
    DomainError,
    EmptyInput,
    LimitViolation,
    ParseError,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_CONFIG = 78

MAP_CSV_HEADER = "alpha_deg,beta_deg,admissible,singularity_margin_rad,dexterity"
COVERAGE_CSV_HEADER = "x_mm,y_mm,z_mm,reachable,fail_reason,alpha_deg,beta_deg,depth_mm"
OPTIMIZE_CSV_HEADER = "evaluation,offset_x_mm,offset_y_mm,offset_z_mm,height_mm,coverage"
SPAN_CSV_HEADER = "variant,max_abs_alpha_deg,max_abs_beta_deg,apex_deg,n_targets,n_excluded"

_DOMAIN_ERRORS = (DomainError, LimitViolation, DepthOutOfRange, DegenerateTarget)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64 instead of argparse's default 2
        raise _UsageError(f"{self.prog}: {message}")


def _write_text_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render_atomic(render, obj, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".png")
    os.close(fd)
    try:
        render(obj, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_input(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read input file {path!r}: {exc}") from None


def _fmt(value) -> str:
    return repr(float(value))


def _plot_path(args) -> Path | None:
    if args.no_plot:
        return None
    if args.plot is not None:
        return Path(args.plot)
    return Path(args.output).with_suffix(".png")


# ---------------------------------------------------------------------------
# kinematics commands


def _cmd_ik(args) -> int:
    from .wrist import OrientationAngles, inverse_kinematics

    joints = inverse_kinematics(
        OrientationAngles(math.radians(args.alpha), math.radians(args.beta))
    )
    print(f"theta1={math.degrees(joints.theta1):.6f} theta2={math.degrees(joints.theta2):.6f}")
    return EXIT_OK


def _cmd_fk(args) -> int:
    from .wrist import JointAngles, forward_kinematics

    angles = forward_kinematics(
        JointAngles(math.radians(args.theta1), math.radians(args.theta2))
    )
    print(f"alpha={math.degrees(angles.alpha):.6f} beta={math.degrees(angles.beta):.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats


def _cmd_stats(args) -> int:
    table = anatomy.parse_measurements(_read_input(args.input), args.kind)
    if not table.records:
        raise EmptyInput(f"no measurement rows in {args.input!r}")
    stats = anatomy.stats_table(table.records, args.kind)

    mean_diffs = sigma_diffs = None
    if args.compare_printed:
        if table.printed_average is None:
            raise ParseError(f"{args.input!r} has no printed Average row to compare against")
        mean_diffs = {
            d.column: d for d in anatomy.diff_against_printed(stats, table.printed_average, "mean")
        }
        if table.printed_sigma is not None:
            sigma_diffs = {
                d.column: d
                for d in anatomy.diff_against_printed(stats, table.printed_sigma, "sigma")
            }

    lines_out = []
    for column, st in stats.items():
        line = (
            f"{column}: n={st.n} mean={st.mean:.6f} "
            f"sigma_sample={st.sigma_sample:.6f} sigma_population={st.sigma_population:.6f}"
        )
        if mean_diffs is not None and column in mean_diffs:
            d = mean_diffs[column]
            line += f" printed_mean={d.printed:g} mean_diff={d.diff:+.6f}"
        if sigma_diffs is not None and column in sigma_diffs:
            d = sigma_diffs[column]
            line += f" printed_sigma={d.printed:g} sigma_diff={d.diff:+.6f}"
        print(line)
        lines_out.append((column, st))

    if args.output:
        header = "column,n,mean,sigma_population,sigma_sample"
        if args.compare_printed:
            header += ",printed_mean,mean_diff,printed_sigma,sigma_diff"
        rows = [header]
        for column, st in lines_out:
            row = f"{column},{st.n},{_fmt(st.mean)},{_fmt(st.sigma_population)},{_fmt(st.sigma_sample)}"
            if args.compare_printed:
                md = mean_diffs.get(column) if mean_diffs else None
                sd = sigma_diffs.get(column) if sigma_diffs else None
                row += f",{_fmt(md.printed) if md else ''},{_fmt(md.diff) if md else ''}"
                row += f",{_fmt(sd.printed) if sd else ''},{_fmt(sd.diff) if sd else ''}"
            rows.append(row)
        _write_text_atomic(args.output, "\n".join(rows) + "\n")
    if args.plot:
        _render_atomic(plotting.render_stats, stats, args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# map


def write_map_csv(omap, path) -> None:
    rows = [MAP_CSV_HEADER]
    for c in omap.cells:
        rows.append(
            f"{_fmt(math.degrees(c.alpha))},{_fmt(math.degrees(c.beta))},"
            f"{1 if c.admissible else 0},{_fmt(c.singularity_margin_rad)},{_fmt(c.dexterity)}"
        )
    _write_text_atomic(path, "\n".join(rows) + "\n")


def read_map_csv(path) -> list[tuple[float, float, bool, float, float]]:
    """Parse a map CSV back into (alpha_deg, beta_deg, admissible, margin, dexterity) rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != MAP_CSV_HEADER:
        raise ParseError(f"{path!r} is not a map CSV (bad header)")
    rows = []
    for line in lines[1:]:
        a, b, adm, margin, dex = line.split(",")
        rows.append((float(a), float(b), bool(int(adm)), float(margin), float(dex)))
    return rows


def _cmd_map(args) -> int:
    settings = load_settings(args.config)
    omap = analysis.orientation_map(settings.mechanism, args.grid)
    write_map_csv(omap, args.output)
    plot = _plot_path(args)
    if plot is not None:
        _render_atomic(plotting.render_orientation_map, omap, plot)
    margins = [c.singularity_margin_rad for c in omap.cells]
    print(
        f"map {omap.n_alpha}x{omap.n_beta} cells={len(omap.cells)} "
        f"admissible={sum(c.admissible for c in omap.cells)} min_margin_rad={min(margins):.6f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# anatomy-driven commands


def _load_workspace(args):
    table = anatomy.parse_measurements(_read_input(args.anatomy), args.kind)
    if not table.records:
        raise EmptyInput(f"no measurement rows in {args.anatomy!r}")
    if args.kind == "ear":
        return anatomy.ear_workspace(
            table.records, statistic=args.statistic, radius_from=args.radius_from
        )
    return anatomy.sinus_workspace(
        table.records, statistic=args.statistic, septum_removed=args.septum_removed
    )


def _sampling_kwargs(args) -> dict:
    if args.count is not None:
        return {"count": args.count, "seed": args.seed}
    return {"step_mm": args.step if args.step is not None else 2.0, "seed": args.seed}


def _cmd_coverage(args) -> int:
    settings = load_settings(args.config)
    workspace = _load_workspace(args)
    result = analysis.coverage(settings.mechanism, workspace, **_sampling_kwargs(args))

    rows = [COVERAGE_CSV_HEADER]
    for p in result.points:
        alpha = _fmt(math.degrees(p.alpha)) if p.alpha is not None else ""
        beta = _fmt(math.degrees(p.beta)) if p.beta is not None else ""
        rows.append(
            f"{_fmt(p.target_mm[0])},{_fmt(p.target_mm[1])},{_fmt(p.target_mm[2])},"
            f"{1 if p.reachable else 0},{'|'.join(p.fail_reasons)},{alpha},{beta},"
            f"{_fmt(p.depth_mm)}"
        )
    _write_text_atomic(args.output, "\n".join(rows) + "\n")
    plot = _plot_path(args)
    if plot is not None:
        _render_atomic(plotting.render_coverage, result, plot)
    print(
        f"coverage={result.fraction:.6f} reachable={result.n_reachable}/{len(result.points)} "
        f"output={args.output}"
    )
    return EXIT_OK


def _cmd_span(args) -> int:
    table = anatomy.parse_measurements(_read_input(args.anatomy), args.kind)
    if not table.records:
        raise EmptyInput(f"no measurement rows in {args.anatomy!r}")
    try:
        rcm = tuple(float(v) for v in args.rcm.split(","))
    except ValueError:
        raise _UsageError("span: --rcm needs three comma-separated numbers") from None
    if len(rcm) != 3:
        raise _UsageError("span: --rcm needs three comma-separated numbers")
    kwargs = _sampling_kwargs(args)

    variants = []
    if args.kind == "ear":
        ws = anatomy.ear_workspace(table.records, statistic=args.statistic,
                                   radius_from=args.radius_from)
        variants.append(("ear", analysis.required_span(ws, rcm, **kwargs)))
    else:
        for name, removed in (("intact_septum", False), ("septum_removed", True)):
            ws = anatomy.sinus_workspace(table.records, statistic=args.statistic,
                                         septum_removed=removed)
            variants.append((name, analysis.required_span(ws, rcm, **kwargs)))

    rows = [SPAN_CSV_HEADER]
    for name, span in variants:
        print(
            f"{name}: max_abs_alpha_deg={math.degrees(span.max_abs_alpha):.3f} "
            f"max_abs_beta_deg={math.degrees(span.max_abs_beta):.3f} "
            f"apex_deg={math.degrees(span.apex_angle_rad):.3f} "
            f"targets={span.n_targets} excluded={span.n_excluded}"
        )
        rows.append(
            f"{name},{_fmt(math.degrees(span.max_abs_alpha))},"
            f"{_fmt(math.degrees(span.max_abs_beta))},{_fmt(math.degrees(span.apex_angle_rad))},"
            f"{span.n_targets},{span.n_excluded}"
        )
    if args.output:
        _write_text_atomic(args.output, "\n".join(rows) + "\n")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    settings = load_settings(args.config)
    workspace = _load_workspace(args)
    method = args.method if args.method is not None else settings.method
    budget = args.budget if args.budget is not None else settings.budget
    report = optimizer.optimize(
        settings.mechanism,
        workspace,
        settings.bounds,
        method=method,
        budget=budget,
        margin_weight=settings.margin_weight,
        **_sampling_kwargs(args),
    )

    rows = [OPTIMIZE_CSV_HEADER]
    for ev in report.history:
        ox, oy, oz = ev.variables.rcm_offset_mm
        rows.append(
            f"{ev.index},{_fmt(ox)},{_fmt(oy)},{_fmt(oz)},"
            f"{_fmt(ev.variables.parallelogram_height_mm)},{_fmt(ev.coverage)}"
        )
    _write_text_atomic(args.output, "\n".join(rows) + "\n")
    plot = _plot_path(args)
    if plot is not None:
        _render_atomic(plotting.render_optimization, report, plot)
    ox, oy, oz = report.best.rcm_offset_mm
    flag = " budget_exhausted" if report.budget_exhausted else ""
    print(
        f"best_coverage={report.best_coverage:.6f} offset_mm=({ox:g},{oy:g},{oz:g}) "
        f"height_mm={report.best.parallelogram_height_mm:g} "
        f"evaluations={report.evaluations}{flag}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_sampling_flags(sub) -> None:
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--step", type=float, default=None,
                       help="grid spacing in mm (default 2.0)")
    group.add_argument("--count", type=int, default=None,
                       help="random sample size (seeded) instead of a grid")
    sub.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")


def _add_anatomy_flags(sub) -> None:
    sub.add_argument("--anatomy", required=True, help="measurement CSV path")
    sub.add_argument("--kind", required=True, choices=("ear", "sinus"))
    sub.add_argument("--statistic", choices=("mean", "min", "max"), default="mean",
                     help="workspace envelope statistic (default mean)")
    sub.add_argument("--radius-from", choices=("sulcus", "lateral"), default="sulcus",
                     help="ear canal diameter used for the cylinder radius")
    sub.add_argument("--septum-removed", action="store_true",
                     help="sinus only: merge both nasal cavities")


def _add_plot_flags(sub) -> None:
    sub.add_argument("--plot", default=None,
                     help="figure path (default: output path with .png suffix)")
    sub.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> _Parser:
    parser = _Parser(prog="rcmscope", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    ik = subs.add_parser("ik", help="inverse kinematics: tilt angles to joint angles")
    ik.add_argument("--alpha", type=float, required=True, help="tilt about x, degrees")
    ik.add_argument("--beta", type=float, required=True, help="tilt about y, degrees")
    ik.set_defaults(func=_cmd_ik)

    fk = subs.add_parser("fk", help="forward kinematics: joint angles to tilt angles")
    fk.add_argument("--theta1", type=float, required=True, help="joint 1, degrees")
    fk.add_argument("--theta2", type=float, required=True, help="joint 2, degrees")
    fk.set_defaults(func=_cmd_fk)

    stats = subs.add_parser("stats", help="column statistics of a measurement table")
    stats.add_argument("--input", required=True, help="measurement CSV path")
    stats.add_argument("--kind", required=True, choices=("ear", "sinus"))
    stats.add_argument("--compare-printed", action="store_true",
                       help="diff recomputed aggregates against the file's printed footer rows")
    stats.add_argument("--output", default=None, help="write the statistics as CSV")
    stats.add_argument("--plot", default=None, help="render a mean/sigma bar chart")
    stats.set_defaults(func=_cmd_stats)

    omap = subs.add_parser("map", help="orientation map over the joint-limit box")
    omap.add_argument("--config", required=True, help="device configuration file")
    omap.add_argument("--grid", type=int, default=45, help="grid points per axis (>= 2)")
    omap.add_argument("--output", required=True, help="map CSV path")
    _add_plot_flags(omap)
    omap.set_defaults(func=_cmd_map)

    cov = subs.add_parser("coverage", help="anatomical coverage of the mechanism")
    cov.add_argument("--config", required=True, help="device configuration file")
    _add_anatomy_flags(cov)
    _add_sampling_flags(cov)
    cov.add_argument("--output", required=True, help="coverage CSV path")
    _add_plot_flags(cov)
    cov.set_defaults(func=_cmd_coverage)

    span = subs.add_parser("span", help="angular span required by a workspace")
    _add_anatomy_flags(span)
    _add_sampling_flags(span)
    span.add_argument("--rcm", default="0,0,0", help="remote-center point, mm triple")
    span.add_argument("--output", default=None, help="span CSV path")
    span.set_defaults(func=_cmd_span)

    opt = subs.add_parser("optimize", help="optimize RCM placement and parallelogram height")
    opt.add_argument("--config", required=True, help="device configuration file")
    _add_anatomy_flags(opt)
    _add_sampling_flags(opt)
    opt.add_argument("--method", choices=("grid", "simplex"), default=None,
                     help="override the configured optimizer method")
    opt.add_argument("--budget", type=int, default=None,
                     help="override the configured evaluation budget")
    opt.add_argument("--output", required=True, help="evaluation-history CSV path")
    _add_plot_flags(opt)
    opt.set_defaults(func=_cmd_optimize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entrypoint() -> None:
    sys.exit(main())
