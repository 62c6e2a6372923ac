"""Figures for morphing runs: SW_2 convergence curve and snapshot strip."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def plot_convergence(k, sw2, stderr=None, path=None, title=None):
    """SW_2 to the target against the iteration index, with its running minimum."""
    k = np.asarray(k)
    sw2 = np.asarray(sw2, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        if stderr is not None:
            ax.errorbar(k, sw2, yerr=stderr, fmt="o-", ms=3, lw=1.2, capsize=2, label=r"$SW_2(\sigma_k,\mu)$")
        else:
            ax.plot(k, sw2, "o-", ms=3, lw=1.2, label=r"$SW_2(\sigma_k,\mu)$")
        ax.plot(k, np.minimum.accumulate(sw2), "--", lw=1.0, color="0.5", label="running min")
        ax.set_xlabel("iteration $k$")
        ax.set_ylabel("sliced Wasserstein distance")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        ax.legend()
        if path is not None:
            fig.savefig(path)
            plt.close(fig)
    return fig


def plot_snapshots(images: dict, path=None, ncols: int = 8):
    """Grid of rendered iterates; ``images`` maps iteration index to a 2D array."""
    keys = sorted(images)
    ncols = min(ncols, len(keys))
    nrows = -(-len(keys) // ncols)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(1.2 * ncols, 1.35 * nrows), squeeze=False)
        for ax in axes.ravel():
            ax.axis("off")
        for ax, key in zip(axes.ravel(), keys):
            ax.imshow(images[key], cmap="gray", vmin=0, vmax=255, interpolation="nearest")
            ax.set_title(f"k={key}", fontsize=8)
        if path is not None:
            fig.savefig(path)
            plt.close(fig)
    return fig


def plot_trajectory_csv(csv_path, path, title=None):
    from .scheme import read_trajectory_csv

    data = read_trajectory_csv(csv_path)
    return plot_convergence(data["k"], data["sw2_estimate"], data["sw2_stderr"], path, title)
