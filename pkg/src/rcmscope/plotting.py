"""Figure rendering for the CLI report paths.

Every renderer draws to a file with the Agg backend (no display needed) and
fixed figure geometry, so repeated runs produce byte-identical images.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 130


def render_orientation_map(omap, path) -> None:
    """Singularity-margin and dexterity heatmaps over the (alpha, beta) box."""
    n_a, n_b = omap.n_alpha, omap.n_beta
    alpha = np.array([c.alpha for c in omap.cells]).reshape(n_a, n_b)
    margin = np.array([c.singularity_margin_rad for c in omap.cells]).reshape(n_a, n_b)
    dex = np.array([c.dexterity for c in omap.cells]).reshape(n_a, n_b)
    beta = np.array([c.beta for c in omap.cells]).reshape(n_a, n_b)
    extent = [
        math.degrees(beta.min()),
        math.degrees(beta.max()),
        math.degrees(alpha.min()),
        math.degrees(alpha.max()),
    ]

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2), constrained_layout=True)
    im0 = axes[0].imshow(margin, origin="lower", extent=extent, aspect="auto", cmap="viridis")
    axes[0].set_title("singularity margin [rad]")
    fig.colorbar(im0, ax=axes[0])
    finite = np.isfinite(dex)
    vmax = dex[finite].max() if finite.any() else 1.0
    im1 = axes[1].imshow(dex, origin="lower", extent=extent, aspect="auto", cmap="magma",
                         vmax=vmax)
    axes[1].set_title("dexterity (condition number)")
    fig.colorbar(im1, ax=axes[1])
    for ax in axes:
        ax.set_xlabel("beta [deg]")
        ax.set_ylabel("alpha [deg]")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_coverage(result, path) -> None:
    """Reachable / unreachable targets in the x-z and y-z planes."""
    pts = np.array([p.target_mm for p in result.points])
    ok = np.array([p.reachable for p in result.points])

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2), constrained_layout=True)
    for ax, (i, name) in zip(axes, ((0, "x"), (1, "y"))):
        ax.scatter(pts[ok, 2], pts[ok, i], s=4, c="tab:green", label="reachable")
        if (~ok).any():
            ax.scatter(pts[~ok, 2], pts[~ok, i], s=4, c="tab:red", label="unreachable")
        ax.set_xlabel("z [mm]")
        ax.set_ylabel(f"{name} [mm]")
        ax.legend(loc="best")
    fig.suptitle(f"coverage = {result.fraction:.4f} ({int(ok.sum())}/{ok.size})")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_optimization(report, path) -> None:
    """Objective value per evaluation with the running best overlaid."""
    idx = np.array([ev.index for ev in report.history])
    cov = np.array([ev.coverage for ev in report.history])
    best = np.maximum.accumulate(cov)

    fig, ax = plt.subplots(figsize=(7, 4.2), constrained_layout=True)
    ax.plot(idx, cov, ".", ms=5, c="tab:gray", label="evaluation")
    ax.step(idx, best, where="post", c="tab:blue", label="running best")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("coverage")
    ax.set_title(f"{report.method}: best = {report.best_coverage:.4f}")
    ax.legend(loc="lower right")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_stats(stats, path) -> None:
    """Column means with sigma error bars (fixed reporting convention)."""
    names = list(stats.keys())
    means = [stats[n].mean for n in names]
    sigmas = [stats[n].sigma for n in names]

    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(names)), 4.4), constrained_layout=True)
    x = np.arange(len(names))
    ax.bar(x, means, yerr=sigmas, capsize=4, color="tab:blue", alpha=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("value")
    ax.set_title("column mean +- sigma")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
