from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from numpy.typing import ArrayLike

# Stable element ids so repeated renders produce the same SVG.
plt.rcParams["svg.hashsalt"] = "mopo-squeeze"


def plot_curves(
    path: Path,
    x: ArrayLike,
    curves: Mapping[str, ArrayLike],
    *,
    xlabel: str,
    ylabel: str,
    title: str,
    logy: bool = False,
    reference: float | None = None,
) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs = np.asarray(x, dtype=float)
    for label, values in curves.items():
        ax.plot(xs, np.asarray(values, dtype=float), label=label, linewidth=1.4)
    if reference is not None:
        ax.axhline(reference, color="0.4", linestyle="--", linewidth=0.9, label="shot noise")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()

    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
