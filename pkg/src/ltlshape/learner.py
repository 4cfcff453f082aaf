"""Tabular Q-learning over augmented (cell, automaton state) pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np


class QTable:
    """Dense table ``values[cell, q, action]``, zero-initialised."""

    def __init__(self, n_cells: int, n_q: int, n_actions: int, default: float = 0.0,
                 values: Optional[np.ndarray] = None):
        if values is None:
            values = np.full((n_cells, n_q, n_actions), default, dtype=np.float64)
        elif values.shape != (n_cells, n_q, n_actions):
            raise ValueError(f"values shape {values.shape} != {(n_cells, n_q, n_actions)}")
        self.values = values
        self.default = default

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def __getitem__(self, key) -> float:
        cell, q, a = key
        return float(self.values[cell, q, a])

    def __setitem__(self, key, value: float) -> None:
        cell, q, a = key
        self.values[cell, q, a] = value

    def best_value(self, cell: int, q: int, legal: Sequence[int]) -> float:
        return float(max(self.values[cell, q, a] for a in legal))

    def dump(self, f: TextIO) -> None:
        """Text checkpoint: a shape line, then ``cell q action value`` per
        nonzero entry, values in ``repr`` form so they reload exactly."""
        c, q, a = self.shape
        f.write(f"# qtable {c} {q} {a}\n")
        for idx in zip(*np.nonzero(self.values)):
            f.write(f"{idx[0]} {idx[1]} {idx[2]} {float(self.values[idx])!r}\n")

    @classmethod
    def load(cls, f: TextIO) -> "QTable":
        head = f.readline().split()
        if head[:2] != ["#", "qtable"] or len(head) != 5:
            raise ValueError("not a qtable checkpoint")
        table = cls(*map(int, head[2:]))
        for line in f:
            if line.strip():
                c, q, a, v = line.split()
                table.values[int(c), int(q), int(a)] = float(v)
        return table


@dataclass(frozen=True)
class Schedule:
    start: float
    end: float
    steps: int
    kind: str = "linear"

    def __post_init__(self):
        if not self.start >= self.end > 0:
            raise ValueError(f"need start >= end > 0, got {self.start} -> {self.end}")
        if self.kind not in ("linear", "exponential"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")


def schedule_value(sch: Schedule, step: int) -> float:
    if step < 0:
        raise ValueError("step must be non-negative")
    if sch.steps <= 0 or step >= sch.steps:
        return sch.end
    frac = step / sch.steps
    if sch.kind == "linear":
        return sch.start + (sch.end - sch.start) * frac
    return sch.start * math.pow(sch.end / sch.start, frac)


def schedule_array(sch: Schedule, n: int) -> np.ndarray:
    return np.array([schedule_value(sch, i) for i in range(n)], dtype=np.float64)


def select_action(table: QTable, s: tuple[int, int], legal: Sequence[int],
                  explore_prob: float, rng) -> int:
    """Epsilon-greedy choice over ``legal``.

    Always consumes one ``rng.random()``, plus a second one when exploring.
    Greedy ties go to the lowest action index.
    """
    if not legal:
        raise ValueError("no legal actions")
    if rng.random() < explore_prob:
        return legal[int(rng.random() * len(legal))]
    row = table.values[s[0], s[1]]
    best = None
    for a in legal:
        if best is None or row[a] > row[best] or (row[a] == row[best] and a < best):
            best = a
    return best


def update(table: QTable, s: tuple[int, int], a: int, r: float, gamma_used: float,
           s_next: Optional[tuple[int, int]], legal_next: Sequence[int], alpha: float) -> None:
    """Q(s,a) += alpha * (r + gamma_used * max Q(s', .) - Q(s,a)).

    ``s_next=None`` marks a terminal transition (bootstrap value 0).
    """
    boot = 0.0 if s_next is None else table.best_value(s_next[0], s_next[1], legal_next)
    old = table.values[s[0], s[1], a]
    table.values[s[0], s[1], a] = old + alpha * (r + gamma_used * boot - old)
