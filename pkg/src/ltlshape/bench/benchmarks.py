"""Shipped benchmarks, baseline reward rules and kernel table encoding."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..automaton import Ldba, load_file
from ..gridworld import N_MOVES, AgentState, GridSpec, read_grid, slip_distribution
from ..paths import resolve
from . import kernels


@dataclass(frozen=True)
class BaselineRewardRule:
    rule: str  # "buttons", "flags" or "rendezvous"
    sync_reward: float = 2.0
    goal_reward: float = 10.0

    def __post_init__(self):
        if self.rule not in ("buttons", "flags", "rendezvous"):
            raise ValueError(f"unknown baseline rule {self.rule!r}")
        if not (np.isfinite(self.sync_reward) and np.isfinite(self.goal_reward)):
            raise ValueError("baseline rewards must be finite")

    @property
    def kernel_rule(self) -> int:
        return kernels.RULE_FLAGS if self.rule == "flags" else kernels.RULE_SYNC


@dataclass(frozen=True)
class Benchmark:
    name: str
    grid: str
    automaton: str
    baseline: BaselineRewardRule
    episode_length: int = 100
    episodes: int = 100_000
    n_agents: int = 2

    def load_grid(self, base: Optional[Path] = None) -> GridSpec:
        return read_grid(resolve(self.grid, base))

    def load_automaton(self, base: Optional[Path] = None) -> Ldba:
        return load_file(resolve(self.automaton, base))


BENCHMARKS = {
    "buttons": Benchmark("buttons", "buttons.grid", "motivating_phi3.hoa",
                         BaselineRewardRule("buttons"), episodes=100_000),
    "buttons_v2": Benchmark("buttons_v2", "buttons.grid", "motivating_phi3prime.hoa",
                            BaselineRewardRule("buttons"), episodes=100_000),
    "flags": Benchmark("flags", "flags.grid", "flags.hoa",
                       BaselineRewardRule("flags"), episodes=150_000),
    "rendezvous": Benchmark("rendezvous", "rendezvous.grid", "rendezvous.hoa",
                            BaselineRewardRule("rendezvous"), episodes=150_000),
}


# --------------------------------------------------------------------------
# baseline rewards, object level

@dataclass(frozen=True)
class BaselineEpisode:
    """Joint state for baseline mode plus the once-per-episode bookkeeping."""

    agents: tuple[AgentState, ...]
    synced: bool = False
    collected: frozenset = frozenset()
    arrived: tuple[bool, ...] = field(default=())

    @classmethod
    def start(cls, grid: GridSpec, n_agents: int) -> "BaselineEpisode":
        agents = tuple(grid.start_state(i) for i in range(n_agents))
        return cls(agents, arrived=tuple(a.absorbed for a in agents))


def baseline_reward(rule: BaselineRewardRule, grid: GridSpec, before: BaselineEpisode,
                    after: Sequence[AgentState]) -> tuple[list[float], BaselineEpisode]:
    """Per-agent rewards for moving from ``before`` to agent states ``after``.

    buttons/rendezvous: every agent gets ``sync_reward`` the first time both
    ``a`` and ``b`` are occupied at once. flags: an agent standing on flag
    ``a`` or ``b`` when it is first reached gets ``sync_reward``. All rules:
    ``goal_reward`` to an agent on its first arrival at a goal.
    """
    n = len(after)
    rewards = [0.0] * n
    labels = [grid.labels_at(s.x, s.y) for s in after]
    union = frozenset().union(*labels)
    synced, collected = before.synced, before.collected
    if rule.rule == "flags":
        for f in ("a", "b"):
            if f not in collected and f in union:
                collected = collected | {f}
                for i in range(n):
                    if f in labels[i]:
                        rewards[i] += rule.sync_reward
    elif not synced and {"a", "b"} <= union:
        synced = True
        rewards = [r + rule.sync_reward for r in rewards]
    arrived = list(before.arrived)
    for i, s in enumerate(after):
        if s.absorbed and not arrived[i]:
            arrived[i] = True
            rewards[i] += rule.goal_reward
    return rewards, BaselineEpisode(tuple(after), synced, collected, tuple(arrived))


# --------------------------------------------------------------------------
# integer tables for the kernels

@dataclass
class GridTables:
    starts: np.ndarray
    goal: np.ndarray
    move_next: np.ndarray
    slip_dir: np.ndarray
    slip_cum: np.ndarray
    slip_n: np.ndarray


def grid_tables(grid: GridSpec, n_agents: int) -> GridTables:
    n = grid.n_cells
    move_next = np.empty((n, N_MOVES), dtype=np.int64)
    goal = np.zeros(n, dtype=np.bool_)
    for c in range(n):
        x, y = grid.coords(c)
        goal[c] = grid.is_goal(x, y)
        for d in range(N_MOVES):
            move_next[c, d] = grid.index(*grid.neighbor(x, y, d))
    slip_dir = np.zeros((N_MOVES, N_MOVES), dtype=np.int64)
    slip_cum = np.ones((N_MOVES, N_MOVES), dtype=np.float64)
    slip_n = np.zeros(N_MOVES, dtype=np.int64)
    for a in range(N_MOVES):
        dist = slip_distribution(grid.slip, a)
        acc = 0.0
        for k, (d, p) in enumerate(dist):
            acc += p
            slip_dir[a, k] = int(d)
            slip_cum[a, k] = acc
        slip_n[a] = len(dist)
    if len(grid.starts) < n_agents:
        raise ValueError(f"grid declares {len(grid.starts)} starts for {n_agents} agents")
    starts = np.array([grid.index(*grid.starts[i]) for i in range(n_agents)], dtype=np.int64)
    return GridTables(starts, goal, move_next, slip_dir, slip_cum, slip_n)


def shaped_cell_masks(grid: GridSpec, ldba: Ldba) -> np.ndarray:
    return np.array([ldba.mask_of(labels) for labels in grid.cell_labels], dtype=np.int64)


def baseline_cell_masks(grid: GridSpec) -> tuple[np.ndarray, int, int]:
    """Bitmask per cell over the grid's own alphabet, plus the bits of a and b."""
    bits = {ap: 1 << i for i, ap in enumerate(sorted(grid.alphabet))}
    masks = np.array([sum(bits[ap] for ap in labels) for labels in grid.cell_labels],
                     dtype=np.int64)
    return masks, bits.get("a", 0), bits.get("b", 0)
