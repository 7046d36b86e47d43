"""Figure rendering for evaluation and hedging reports.

Renders PNGs next to the delimited outputs; everything draws through the
Agg backend so the CLI works headless.  The statistics themselves live
in metrics; this module only plots what a report already contains.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import Dataset
from .metrics import MetricsReport

__all__ = ["evaluation_figures", "hedge_figures"]

_REF_COLOR = "#555555"
_GEN_COLOR = "#C44E52"


def _save(fig, outdir: str, name: str) -> str:
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def evaluation_figures(report: MetricsReport, ref: Dataset, gen: Dataset,
                       outdir: str, max_paths: int = 12) -> list:
    """Render the standard comparison panels; returns the file paths."""
    os.makedirs(outdir, exist_ok=True)
    dates = np.asarray(report.dates)
    files = []

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.fill_between(dates, report.ref_q5, report.ref_q95, color=_REF_COLOR, alpha=0.18,
                    label="reference 5-95%")
    ax.fill_between(dates, report.gen_q5, report.gen_q95, color=_GEN_COLOR, alpha=0.18,
                    label="generated 5-95%")
    ax.plot(dates, report.ref_mean, color=_REF_COLOR, lw=1.8, label="reference mean")
    ax.plot(dates, report.gen_mean, color=_GEN_COLOR, lw=1.8, ls="--", label="generated mean")
    ax.set_xlabel("date")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    files.append(_save(fig, outdir, "marginals.png"))

    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(dates, report.ks_pvalue, "o-", ms=4, color=_GEN_COLOR)
    ax.axhline(0.05, color="k", lw=0.8, ls=":")
    ax.set_xlabel("date")
    ax.set_ylabel("KS p-value")
    ax.set_ylim(-0.02, 1.02)
    files.append(_save(fig, outdir, "ks_pvalues.png"))

    fig, ax = plt.subplots(figsize=(6, 4))
    lo = min(min(report.qv_ref), min(report.qv_gen))
    hi = max(max(report.qv_ref), max(report.qv_gen))
    bins = np.linspace(lo, hi, 40) if hi > lo else 10
    ax.hist(report.qv_ref, bins=bins, color=_REF_COLOR, alpha=0.55, density=True,
            label="reference")
    ax.hist(report.qv_gen, bins=bins, color=_GEN_COLOR, alpha=0.55, density=True,
            label="generated")
    ax.set_xlabel("quadratic variation")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    files.append(_save(fig, outdir, "qv_hist.png"))

    fig, ax = plt.subplots(figsize=(5, 4.2))
    diff = np.asarray(report.corr_diff)
    span = max(1e-12, float(np.abs(diff).max()))
    im = ax.imshow(diff, cmap="coolwarm", vmin=-span, vmax=span,
                   extent=(dates[0], dates[-1], dates[-1], dates[0]))
    fig.colorbar(im, ax=ax, label="corr(gen) - corr(ref)")
    ax.set_xlabel("date")
    ax.set_ylabel("date")
    files.append(_save(fig, outdir, "corr_diff.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    k = min(max_paths, ref.n_paths, gen.n_paths)
    for m in range(k):
        ax.plot(dates, ref.values[m, :, 0], color=_REF_COLOR, lw=0.7, alpha=0.6)
        ax.plot(dates, gen.values[m, :, 0], color=_GEN_COLOR, lw=0.7, alpha=0.6)
    ax.plot([], [], color=_REF_COLOR, label="reference")
    ax.plot([], [], color=_GEN_COLOR, label="generated")
    ax.set_xlabel("date")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    files.append(_save(fig, outdir, "paths.png"))
    return files


def hedge_figures(train_history, valid_history, pnl_values: np.ndarray,
                  outdir: str) -> list:
    """Loss trajectory and the test PnL histogram."""
    os.makedirs(outdir, exist_ok=True)
    files = []

    fig, ax = plt.subplots(figsize=(6, 3.6))
    epochs = np.arange(1, len(train_history) + 1)
    ax.semilogy(epochs, train_history, color=_REF_COLOR, label="train")
    ax.semilogy(epochs, valid_history, color=_GEN_COLOR, label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean squared PnL")
    ax.legend(fontsize=8)
    files.append(_save(fig, outdir, "loss_history.png"))

    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.hist(np.asarray(pnl_values), bins=40, color=_GEN_COLOR, alpha=0.8)
    ax.axvline(0.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("PnL")
    ax.set_ylabel("paths")
    files.append(_save(fig, outdir, "pnl_hist.png"))
    return files
