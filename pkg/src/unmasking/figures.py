"""Matplotlib figures emitted next to the CLI's data files.

Each report command renders one PNG summarizing the table it just wrote.
Figures are a convenience view of the data output, not part of the
byte-determinism contract (the data files are); rendering always uses the
Agg backend so headless runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .curves import EntropyCurve, InfoCurve
from .schedules import NodeVector, Schedule, left_riemann_seq, schedule_to_nodes
from .stepfit import ExperimentRow

_RC = {
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


def _save(fig, path: str) -> None:
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def render_curve(path: str, info: InfoCurve, entropy: EntropyCurve) -> None:
    """Information curve (with stderr bars when present) over the H-curve."""
    with plt.rc_context(_RC):
        fig, (ax_z, ax_h) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
        j = np.arange(1, info.n + 1)
        if info.stderr is not None:
            ax_z.errorbar(j, info.values, yerr=info.stderr, fmt="o-", ms=3.5, capsize=2)
        else:
            ax_z.plot(j, info.values, "o-", ms=3.5)
        ax_z.set_ylabel("Z (bits)")
        ax_h.plot(np.arange(entropy.n + 1), entropy.values, "s-", ms=3.5, color="C1")
        ax_h.set_ylabel("H (bits)")
        ax_h.set_xlabel("level j")
        fig.suptitle("information and entropy curves")
        _save(fig, path)


def _staircase(ax, info: InfoCurve, nodes: NodeVector, label: str) -> None:
    j = np.arange(1, info.n + 1)
    stair = left_riemann_seq(info, nodes)
    ax.plot(j, info.values, "o", ms=4, label="Z_j")
    ax.step(j, stair, where="post", color="C3", label=label)
    ax.fill_between(j, stair, info.values, step="post", alpha=0.25, color="C3")
    ax.set_xlabel("level j")
    ax.set_ylabel("bits")
    ax.legend(loc="lower right")


def render_plan(path: str, info: InfoCurve, schedule: Schedule, error: float | None) -> None:
    """The planned schedule's staircase against the curve, gap shaded."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.8))
        nodes = schedule_to_nodes(schedule)
        _staircase(ax, info, nodes, f"staircase, k={schedule.k}")
        title = f"schedule {schedule.steps}"
        if error is not None:
            title += f"  (gap {error:.4g} bits)"
        ax.set_title(title)
        _save(fig, path)


def render_sweep(path: str, eps: float, plans: list[dict]) -> None:
    """Round counts and realized errors across the hat grid, per route."""
    with plt.rc_context(_RC):
        fig, (ax_k, ax_e) = plt.subplots(1, 2, figsize=(9, 3.6))
        for route, marker in (("tc", "o"), ("dtc", "s"), ("austin", "^")):
            rows = [p for p in plans if p["route"] == route]
            if not rows:
                continue
            hats = [p["hat_bits"] for p in rows]
            ax_k.plot(hats, [p["k"] for p in rows], marker + "-", label=route)
            ax_e.plot(hats, [p["error_bits"] for p in rows], marker + "-", label=route)
        for ax in (ax_k, ax_e):
            ax.set_xscale("log", base=2)
            ax.set_xlabel("hat (bits)")
            ax.legend()
        ax_k.set_ylabel("rounds k")
        ax_e.axhline(eps, color="k", lw=0.8, ls="--")
        ax_e.set_ylabel("realized error (bits)")
        fig.suptitle("schedule sweep over the hat grid")
        _save(fig, path)


def render_experiment(path: str, rows: list[ExperimentRow]) -> None:
    """Lower-bound experiment: best-k error ratio against curve size."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.6))
        ns = [r.n for r in rows]
        ax.plot(ns, [r.ratio for r in rows], "o-", label="best-k error / eps")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("n")
        ax.set_ylabel("ratio")
        for r in rows:
            ax.annotate(f"k={r.k}", (r.n, r.ratio), textcoords="offset points", xytext=(0, 6))
        ax.legend()
        ax.set_title("piecewise-fit lower-bound experiment")
        _save(fig, path)


def render_summary(path: str, info: InfoCurve, tc: float, dtc: float) -> None:
    """Curve with the two correlation totals called out."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.6))
        j = np.arange(1, info.n + 1)
        ax.plot(j, info.values, "o-", ms=4)
        ax.set_xlabel("level j")
        ax.set_ylabel("Z (bits)")
        ax.set_title(f"tc = {tc:.4g} bits, dtc = {dtc:.4g} bits")
        _save(fig, path)
