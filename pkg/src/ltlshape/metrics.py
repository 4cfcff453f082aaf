"""Learning-curve post-processing: min-max normalization and trailing-window
rolling mean / standard deviation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_WINDOW = 1000


def normalize(values, lo=None, hi=None) -> np.ndarray:
    """Affine rescale so ``lo`` maps to 0 and ``hi`` to 1.

    ``lo``/``hi`` default to the min/max of ``values``. A constant series
    maps to 0.5 with a warning.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot normalize an empty series")
    lo = float(v.min()) if lo is None else lo
    hi = float(v.max()) if hi is None else hi
    if hi == lo:
        warnings.warn("constant returns; normalized to 0.5", RuntimeWarning, stacklevel=2)
        return np.full(v.shape, 0.5)
    return (v - lo) / (hi - lo)


def smooth(values, window: int = DEFAULT_WINDOW) -> tuple[np.ndarray, np.ndarray]:
    """Trailing rolling mean and population std.

    Point ``i`` averages ``values[max(0, i - window + 1): i + 1]``, so the
    first ``window - 1`` points use the shorter prefix.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("smooth expects a non-empty 1-d series")
    if window < 1:
        raise ValueError("window must be positive")
    # shift by the mean to keep the running-sum variance well conditioned
    shift = v.mean()
    x = v - shift
    c1 = np.concatenate(([0.0], np.cumsum(x)))
    c2 = np.concatenate(([0.0], np.cumsum(x * x)))
    hi = np.arange(1, v.size + 1)
    lo = np.maximum(hi - window, 0)
    n = hi - lo
    s1 = c1[hi] - c1[lo]
    s2 = c2[hi] - c2[lo]
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    return mean + shift, np.sqrt(var)


@dataclass
class LearningCurve:
    """Per-seed curve. ``raw`` and ``normalized`` are (episodes, agents);
    ``smoothed`` and ``rolling_std`` are over the agent-averaged normalized
    returns."""

    seed: int
    raw: np.ndarray
    normalized: np.ndarray
    smoothed: np.ndarray
    rolling_std: np.ndarray

    @property
    def n_episodes(self) -> int:
        return self.raw.shape[0]

    def final_smoothed(self) -> float:
        return float(self.smoothed[-1])


def build_curves(returns: Sequence[np.ndarray], seeds: Sequence[int],
                 window: int = DEFAULT_WINDOW) -> list[LearningCurve]:
    """Normalize all runs of one method together, then smooth per seed."""
    if not returns or returns[0].shape[0] == 0:
        return [LearningCurve(s, r, r.copy(), np.zeros(0), np.zeros(0))
                for s, r in zip(seeds, returns)]
    pooled = np.concatenate([r.ravel() for r in returns])
    lo, hi = float(pooled.min()), float(pooled.max())
    curves = []
    for seed, raw in zip(seeds, returns):
        if hi == lo:
            norm = normalize(raw)
        else:
            norm = normalize(raw, lo, hi)
        mean, std = smooth(norm.mean(axis=1), window)
        curves.append(LearningCurve(seed, raw, norm, mean, std))
    return curves


def final_mean(curves: Sequence[LearningCurve]) -> float:
    return float(np.mean([c.final_smoothed() for c in curves]))


def final_raw_mean(curves: Sequence[LearningCurve], window: int = DEFAULT_WINDOW) -> float:
    return float(np.mean([c.raw[-window:].mean() for c in curves]))


def final_quartile_std(curves: Sequence[LearningCurve]) -> float:
    """Mean rolling std over the last quarter of training, averaged over seeds."""
    vals = []
    for c in curves:
        k = max(1, c.n_episodes // 4)
        vals.append(c.rolling_std[-k:].mean())
    return float(np.mean(vals))
