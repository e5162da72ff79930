"""Matplotlib figures written next to the CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .norms import MonitorSeries  # noqa: E402

__all__ = ["plot_monitors", "plot_sweep"]

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _positive_or_nan(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, np.nan)


def plot_monitors(series: MonitorSeries, path, epsilon0: float | None = None) -> Path:
    """Four panels: L3 norms, H^{1/2} norms, energies, and the A- functionals."""
    path = Path(path)
    t = series.column("t")
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(2, 2, figsize=(8, 6), sharex=True)
        ax = axes[0, 0]
        ax.plot(t, series.column("l3_wp"), label=r"$\|W^+\|_{L^3}$")
        ax.plot(t, series.column("l3_wm"), label=r"$\|W^-\|_{L^3}$")
        ax.set_ylabel("L3 norm")
        ax.legend()

        ax = axes[0, 1]
        ax.plot(t, series.column("h12_wp"), label=r"$\|W^+\|_{\dot H^{1/2}}$")
        ax.plot(t, series.column("h12_wm"), label=r"$\|W^-\|_{\dot H^{1/2}}$")
        ax.set_ylabel("H^1/2 norm")
        ax.legend()

        ax = axes[1, 0]
        ax.plot(t, series.column("energy_u"), label="kinetic")
        ax.plot(t, series.column("energy_b"), label="magnetic")
        ax.set_ylabel("energy")
        ax.set_xlabel("t")
        ax.legend()

        ax = axes[1, 1]
        a3 = _positive_or_nan(series.column("a_minus_l3"))
        a12 = _positive_or_nan(series.column("a_minus_h12"))
        ax.plot(t, a3, label=r"$A^-$ ($L^3$ form)")
        ax.plot(t, a12, label=r"$A^-$ ($\dot H^{1/2}$ form)")
        if epsilon0 is not None:
            ax.axhline(2 * epsilon0, color="k", ls="--", lw=0.8, label=r"$2\epsilon_0$")
        if np.any(np.isfinite(a3)) or np.any(np.isfinite(a12)):
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.legend()

        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    return path


def plot_sweep(rows: list[dict], axis: str, path) -> Path:
    """Condition left-hand sides against one sweep axis (log scale)."""
    path = Path(path)
    x = [r.get(axis) for r in rows]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for which in ("lhs_2.1", "lhs_2.2", "lhs_2.7", "lhs_2.8"):
            y = _positive_or_nan([r.get(which, np.nan) for r in rows])
            if np.any(np.isfinite(y)):
                ax.plot(x, y, "o-", ms=3, label=which.replace("lhs_", "condition "))
        eps = rows[0].get("epsilon0") if rows else None
        if eps is not None:
            ax.axhline(eps, color="k", ls="--", lw=0.8, label=r"$\epsilon_0$")
        ax.set_yscale("log")
        ax.set_xlabel(axis)
        ax.set_ylabel("left-hand side")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
    return path
