"""SVG learning-curve charts from result CSVs (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .runner import read_csv


def plot_csvs(paths: Sequence, out, title: str = "") -> Path:
    """Seed-averaged smoothed curve with a +-1 rolling std band per CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for path in paths:
        per_seed = read_csv(path)
        if not per_seed:
            continue
        runs = np.stack([v[:, 1] for v in per_seed.values()])
        stds = np.stack([v[:, 2] for v in per_seed.values()])
        episodes = next(iter(per_seed.values()))[:, 0]
        mean, std = runs.mean(axis=0), stds.mean(axis=0)
        line, = ax.plot(episodes, mean, label=Path(path).stem, lw=1.2)
        ax.fill_between(episodes, mean - std, mean + std, color=line.get_color(), alpha=0.2, lw=0)
    ax.set_xlabel("episode")
    ax.set_ylabel("normalized return (smoothed)")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the SVG byte-stable across runs
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
