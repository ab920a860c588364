"""Figure rendering for the report path.

Each plot-data command writes a delimited table and a PNG next to it; these
helpers draw the standard four views: the objective-space front, per-solution
SIR ordered by the similarity score, the robustness sweep, and source/estimate
waveforms.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .bundle import SolutionBundle

BASELINE_STYLE = {"nernst": ("tab:red", "s"), "sobi-criterion": ("tab:green", "D")}


def render_front(bundle: SolutionBundle, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    j1 = [e.slope_similarity for e in bundle.archive]
    j2 = [e.off_diagonality for e in bundle.archive]
    ax.scatter(j1, j2, s=18, color="tab:blue", label="non-dominated set", zorder=3)
    for name, entry in sorted(bundle.baselines.items()):
        color, marker = BASELINE_STYLE.get(name, ("tab:gray", "x"))
        ax.scatter(
            [entry.slope_similarity],
            [entry.off_diagonality],
            s=70,
            color=color,
            marker=marker,
            label=f"mono: {name}",
            zorder=4,
        )
    if bundle.best_index is not None:
        best = bundle.archive[bundle.best_index]
        ax.scatter(
            [best.slope_similarity],
            [best.off_diagonality],
            s=120,
            facecolors="none",
            edgecolors="black",
            label="best non-dominated",
            zorder=5,
        )
    ax.set_xlabel("slope similarity (mV$^2$)")
    ax.set_ylabel("off-diagonality")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sir_by_index(bundle: SolutionBundle, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    averages = [e.sir.average_db for e in bundle.archive if e.sir is not None]
    ax.plot(range(len(averages)), averages, "o-", ms=4, label="non-dominated solutions")
    for name, entry in sorted(bundle.baselines.items()):
        if entry.sir is None:
            continue
        color, _ = BASELINE_STYLE.get(name, ("tab:gray", "x"))
        ax.axhline(entry.sir.average_db, color=color, ls="--", lw=1, label=f"mono: {name}")
    ax.set_xlabel("solution index (ascending slope similarity)")
    ax.set_ylabel("average SIR (dB)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(bundle: SolutionBundle, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    refs = [p.reference_mv for p in bundle.sweep or []]
    sirs = [p.best_average_sir_db for p in bundle.sweep or []]
    ax.plot(refs, sirs, "o-")
    ax.set_xlabel("slope reference (mV/decade)")
    ax.set_ylabel("best average SIR (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sources(
    bundle: SolutionBundle, series: dict[str, list[list[float]]], path: str | Path
) -> None:
    """Waveform grid: one row per channel, one line per named series."""
    n = bundle.mixtures.n_channels
    fig, axes = plt.subplots(n, 1, figsize=(7, 2.2 * n), sharex=True, squeeze=False)
    for channel in range(n):
        ax = axes[channel][0]
        for name, rows in series.items():
            style = "-" if name == "truth" else "--"
            ax.plot(rows[channel], style, lw=1.2, label=name)
        ax.set_ylabel(f"channel {channel + 1}")
    axes[-1][0].set_xlabel("sample")
    axes[0][0].legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
