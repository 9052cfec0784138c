"""Matplotlib figures for the experiment reports.

Everything renders through the Agg backend straight to files; nothing
here opens a window. Each function takes already-computed results, so the
plots never re-run the experiments.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .lattice import CaTrajectory
from .stats import DecayRow, EscapeRow, SurvivalCurve, TailFit


def survival_figure(path: str, curve: SurvivalCurve, fit: TailFit | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    positive = curve.survival > 0
    ax.semilogy(curve.grid[positive], curve.survival[positive], ".", ms=4, label="empirical S(t)")
    if fit is not None:
        lo, hi = fit.fit_range
        ts = np.linspace(lo, hi, 50)
        ax.semilogy(ts, np.exp(fit.intercept - fit.rate * ts), "-",
                    label=f"rate {fit.rate:.3f}, r²={fit.r_squared:.4f}")
    ax.set_xlabel("t")
    ax.set_ylabel("S(t)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def scaling_figure(path: str, base: np.ndarray, rescaled: np.ndarray, ks: float) -> None:
    """Overlay the empirical survival of the base and rescaled samples."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for sample, label in ((base, "reference"), (rescaled, "rescaled")):
        xs = np.sort(sample)
        surv = 1.0 - np.arange(1, xs.size + 1) / xs.size
        ax.semilogy(xs[surv > 0], surv[surv > 0], label=label)
    ax.set_xlabel("total length")
    ax.set_ylabel("S(t)")
    ax.set_title(f"KS distance {ks:.4f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def decay_figure(path: str, rows: tuple[DecayRow, ...]) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ds = [r.distance for r in rows]
    ax.errorbar(ds, [r.value for r in rows], yerr=[3 * r.std_error for r in rows],
                fmt="o-", capsize=4, label="covariance ±3 SE")
    ax.axhline(0.0, color="#888888", lw=0.8)
    ax.set_xlabel("L1 separation")
    ax.set_ylabel("covariance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def escape_figure(path: str, rows: tuple[EscapeRow, ...]) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ns = [r.box_side for r in rows]
    scale = [r.normalized / r.mean if r.mean > 0 else 0.0 for r in rows]
    ax.errorbar(ns, [r.normalized for r in rows],
                yerr=[3 * r.std_error * s for r, s in zip(rows, scale)],
                fmt="s-", capsize=4)
    ax.set_xlabel("box side N")
    ax.set_ylabel("mean escaping rays / (√λ·N)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def ca_activity_figure(path: str, trajectory: CaTrajectory) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    sizes = trajectory.sizes
    ax.plot(range(len(sizes)), sizes, "o-", ms=3)
    if trajectory.cycle_start is not None:
        ax.axvline(trajectory.cycle_start, color="#d62728", lw=0.8, ls="--",
                   label=f"cycle start (period {trajectory.cycle_period})")
        ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("|A(t)|")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
