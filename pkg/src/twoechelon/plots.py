"""Static figures for solver runs and benchmarks (headless matplotlib)."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_trace(trace: Sequence[tuple], path: str, title: str = "") -> None:
    """Objective vs iteration: working generation and best feasible cost."""
    its = [row[0] for row in trace]
    work = [row[1] for row in trace]
    best = [row[3] for row in trace]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(its, work, lw=0.6, color="0.6", label="working")
    pts = [(i, b) for i, b in zip(its, best) if b is not None]
    if pts:
        ax.plot([i for i, _ in pts], [b for _, b in pts], lw=1.4,
                color="tab:blue", label="best feasible")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_gap_bars(labels: Sequence[str], gaps: Dict[str, Sequence[float]],
                  path: str, ylabel: str = "gap to reference (%)") -> None:
    """Grouped bars: one group per instance, one bar per variant."""
    variants = sorted(gaps)
    n, m = len(labels), len(variants)
    width = 0.8 / max(m, 1)
    fig, ax = plt.subplots(figsize=(max(6, 0.55 * n * max(m, 1)), 4))
    for vi, variant in enumerate(variants):
        xs = [i + (vi - (m - 1) / 2.0) * width for i in range(n)]
        ax.bar(xs, gaps[variant], width=width, label=variant)
    ax.set_xticks(range(n))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel(ylabel)
    ax.axhline(0.0, color="0.3", lw=0.8)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_solution_map(inst, sol, path: str, title: str = "") -> None:
    """Node scatter with LEV route polylines; needs instance coordinates."""
    if inst.coords is None:
        return
    fig, ax = plt.subplots(figsize=(6, 6))
    for r in sol.lev_routes:
        xs, ys = [], []
        for n in [r.depot, r.tp] + list(r.sequence) + [r.depot]:
            x, y = inst.coords[n]
            xs.append(x)
            ys.append(y)
        ax.plot(xs, ys, lw=0.8, alpha=0.7)
    for j in sol.jacks:
        (x1, y1), (x2, y2) = inst.coords[j.tp], inst.coords[j.point]
        ax.plot([x1, x2], [y1, y2], lw=0.8, ls=":", color="tab:red")
    hx, hy = inst.coords[inst.hub]
    ax.scatter([hx], [hy], marker="s", s=60, color="k", label="hub")
    ax.scatter([inst.coords[d][0] for d in inst.depots],
               [inst.coords[d][1] for d in inst.depots],
               marker="^", s=40, color="tab:green", label="depot")
    open_x = [inst.coords[t][0] for t in sorted(sol.open_tps)]
    open_y = [inst.coords[t][1] for t in sorted(sol.open_tps)]
    ax.scatter(open_x, open_y, marker="D", s=40, color="tab:orange",
               label="open TP")
    closed = [t for t in inst.tp_ids if t not in sol.open_tps]
    if closed:
        ax.scatter([inst.coords[t][0] for t in closed],
                   [inst.coords[t][1] for t in closed],
                   marker="D", s=40, facecolors="none", edgecolors="0.5",
                   label="closed TP")
    ax.scatter([inst.coords[p][0] for p in inst.point_ids],
               [inst.coords[p][1] for p in inst.point_ids],
               marker="o", s=12, color="tab:blue", label="customer")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
