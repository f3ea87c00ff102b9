"""Figure rendering for the report paths.

Every CLI report that writes delimited output also renders a matplotlib
figure next to it.  All rendering is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "convergence_figure",
    "fields_figure",
    "hm_figure",
    "monitor_figure",
    "scan_figure",
]


def _mid_slice(arr: np.ndarray) -> np.ndarray:
    # 2D arrays pass through; 3D arrays are shown at the middle plane
    if arr.ndim == 3:
        return arr[:, :, arr.shape[2] // 2]
    return arr


def convergence_figure(increments, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    levels = np.arange(1, len(increments) + 1)
    ax.semilogy(levels, np.maximum(increments, 1e-300), "o-", ms=4)
    ax.set_xlabel("level")
    ax.set_ylabel("sup-norm increment")
    ax.set_title("successive-approximation convergence")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def fields_figure(u, b, path, time=None) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.6))
    for ax, f, name in ((axes[0], u, "|U|"), (axes[1], b, "|B|")):
        img = ax.imshow(_mid_slice(f.magnitude()).T, origin="lower", cmap="viridis")
        ax.set_title(name if time is None else f"{name} at t = {time:.4g}")
        fig.colorbar(img, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def hm_figure(rows, path) -> None:
    """rows: (gamma, closed_form, mc_mean, mc_se, walks, seed) tuples."""
    from .harmonic import solynin_lower_bound

    fig, ax = plt.subplots(figsize=(5, 3.5))
    gs = np.linspace(0.02, 0.98, 200)
    ax.plot(gs, [solynin_lower_bound(g) for g in gs], "-", label="closed form")
    gamma = [r[0] for r in rows]
    mean = [r[2] for r in rows]
    err = [3.0 * r[3] for r in rows]
    ax.errorbar(gamma, mean, yerr=err, fmt="o", ms=4, capsize=3, label="walk estimate")
    ax.set_xlabel("gamma")
    ax.set_ylabel("harmonic measure at 0")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def monitor_figure(verdict, path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    t0s = [s.t0 for s in verdict.steps]
    a = [s.a_norm for s in verdict.steps]
    ax.plot(t0s, a, "o-", ms=5, label="norm budget A(t0)")
    for s in verdict.steps:
        if s.case == "sparse-certified" and s.measured_sum is not None:
            ax.plot([s.t_checked], [s.measured_sum], "s", color="tab:green", ms=5)
    ax.axvline(verdict.horizon, ls="--", color="k", alpha=0.5, label="horizon")
    ax.set_xlabel("restart time t0")
    ax.set_ylabel("sup-norm budget")
    ax.set_title(f"chain outcome: {verdict.status}")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def scan_figure(level_set, reports, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.6))
    axes[0].imshow(_mid_slice(level_set.indicator).T, origin="lower", cmap="gray_r")
    axes[0].set_title(f"super-level set, M = {level_set.threshold:.4g}")
    pts = np.array([r.point[:2] for r in reports])
    ratios = np.array([r.ratio for r in reports])
    ok = np.array([r.sparse for r in reports])
    sc = axes[1].scatter(pts[:, 0], pts[:, 1], c=ratios, cmap="coolwarm", s=26)
    if (~ok).any():
        axes[1].scatter(pts[~ok, 0], pts[~ok, 1], marker="x", c="k", s=40)
    fig.colorbar(sc, ax=axes[1], shrink=0.85, label="best occupancy ratio")
    axes[1].set_title("scan verdicts (x = not sparse)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
