"""Training runs and experiments (seeds x modes) for the benchmarks."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..automaton import Ldba
from ..gridworld import N_MOVES, GridSpec, Move
from ..learner import QTable, Schedule, schedule_array, select_action, update
from ..metrics import DEFAULT_WINDOW, LearningCurve, build_curves
from .. import shaping
from . import kernels
from .benchmarks import (BaselineEpisode, BaselineRewardRule, Benchmark, baseline_cell_masks,
                         baseline_reward, grid_tables, shaped_cell_masks)

log = logging.getLogger(__name__)

MODES = ("shaped", "baseline")


@dataclass(frozen=True)
class TrainingParams:
    episodes: int
    episode_length: int = 100
    gamma: float = 0.999
    gamma_b: float = 0.99
    trap_reward: float = -1.0
    explore_start: float = 1.0
    explore_end: float = 0.01
    alpha_start: float = 1.0
    alpha_end: float = 0.001
    schedule_kind: str = "linear"
    decay_episodes: Optional[int] = None  # defaults to all episodes

    def __post_init__(self):
        if self.episodes < 0 or self.episode_length < 1:
            raise ValueError("need episodes >= 0 and episode_length >= 1")
        if not 0.0 < self.gamma_b <= self.gamma < 1.0:
            raise ValueError(f"need 0 < gamma_b <= gamma < 1, got gamma={self.gamma}, "
                             f"gamma_b={self.gamma_b}")

    def _steps(self) -> int:
        return self.episodes if self.decay_episodes is None else self.decay_episodes

    def explore_schedule(self) -> Schedule:
        return Schedule(self.explore_start, self.explore_end, self._steps(), self.schedule_kind)

    def alpha_schedule(self) -> Schedule:
        return Schedule(self.alpha_start, self.alpha_end, self._steps(), self.schedule_kind)


@dataclass
class TrainResult:
    seed: int
    q: np.ndarray  # (agents, cells, automaton states, actions)
    returns: np.ndarray  # (episodes, agents), undiscounted

    def qtable(self, agent: int) -> QTable:
        return QTable(*self.q.shape[1:], values=self.q[agent])


def _n_agents(grid: GridSpec, n_agents: Optional[int]) -> int:
    return len(grid.starts) if n_agents is None else n_agents


def train(grid: GridSpec, mode: str, seed: int, params: TrainingParams,
          ldba: Optional[Ldba] = None, rule: Optional[BaselineRewardRule] = None,
          n_agents: Optional[int] = None) -> TrainResult:
    """One training run through the kernels (compiled unless disabled)."""
    n = _n_agents(grid, n_agents)
    gt = grid_tables(grid, n)
    explore = schedule_array(params.explore_schedule(), params.episodes)
    alpha = schedule_array(params.alpha_schedule(), params.episodes)
    returns = np.zeros((params.episodes, n), dtype=np.float64)
    if mode == "shaped":
        if ldba is None:
            raise ValueError("shaped mode needs an automaton")
        shaping.check_alphabet(shaping.ShapingConfig(ldba, (grid,) * n, params.gamma,
                                                     params.gamma_b, params.trap_reward))
        q = np.zeros((n, grid.n_cells, ldba.n_states, N_MOVES + ldba.n_epsilons))
        eps_next = np.ascontiguousarray(ldba.eps_next[:, :ldba.n_epsilons])
        eps_acc = np.ascontiguousarray(ldba.eps_acc[:, :ldba.n_epsilons])
        kernels.train_shaped(
            q, returns, gt.starts, gt.goal, shaped_cell_masks(grid, ldba), gt.move_next,
            gt.slip_dir, gt.slip_cum, gt.slip_n,
            np.ascontiguousarray(ldba.next_table), np.ascontiguousarray(ldba.acc_table),
            eps_next, eps_acc, ldba.initial, -1 if ldba.trap is None else ldba.trap,
            params.gamma, params.gamma_b, params.trap_reward, explore, alpha,
            params.episode_length, seed)
    elif mode == "baseline":
        if rule is None:
            raise ValueError("baseline mode needs a reward rule")
        q = np.zeros((n, grid.n_cells, 1, N_MOVES))
        masks, bit_a, bit_b = baseline_cell_masks(grid)
        kernels.train_baseline(
            q, returns, gt.starts, gt.goal, masks, gt.move_next, gt.slip_dir, gt.slip_cum,
            gt.slip_n, rule.kernel_rule, bit_a, bit_b, rule.sync_reward, rule.goal_reward,
            params.gamma, explore, alpha, params.episode_length, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TrainResult(seed, q, returns)


def train_reference(grid: GridSpec, mode: str, seed: int, params: TrainingParams,
                    ldba: Optional[Ldba] = None, rule: Optional[BaselineRewardRule] = None,
                    n_agents: Optional[int] = None) -> TrainResult:
    """Same run as :func:`train`, written against the object-level API.

    Slow; it exists to pin the kernels to the documented semantics.
    """
    n = _n_agents(grid, n_agents)
    rng = np.random.RandomState(seed)
    explore = schedule_array(params.explore_schedule(), params.episodes)
    alpha = schedule_array(params.alpha_schedule(), params.episodes)
    returns = np.zeros((params.episodes, n))
    grids = (grid,) * n

    if mode == "shaped":
        cfg = shaping.ShapingConfig(ldba, grids, params.gamma, params.gamma_b, params.trap_reward)
        tables = [QTable(grid.n_cells, ldba.n_states, N_MOVES + ldba.n_epsilons) for _ in range(n)]
        for ep in range(params.episodes):
            st = shaping.reset(cfg)
            for t in range(params.episode_length):
                s = [(grid.index(a.x, a.y), st.q) for a in st.agents]
                acts = [select_action(tables[i], s[i], shaping.augmented_actions(st, i, cfg),
                                      explore[ep], rng) for i in range(n)]
                out = shaping.joint_step(st, acts, cfg, rng)
                terminal = out.trapped or t == params.episode_length - 1
                for i in range(n):
                    a = out.state.agents[i]
                    nxt = None if terminal else (grid.index(a.x, a.y), out.state.q)
                    legal = [] if terminal else shaping.augmented_actions(out.state, i, cfg)
                    update(tables[i], s[i], acts[i], out.reward, out.discount, nxt, legal, alpha[ep])
                    returns[ep, i] += out.reward
                st = out.state
                if out.trapped:
                    break
    elif mode == "baseline":
        from ..gridworld import env_step

        tables = [QTable(grid.n_cells, 1, N_MOVES) for _ in range(n)]
        for ep in range(params.episodes):
            st = BaselineEpisode.start(grid, n)
            for t in range(params.episode_length):
                s = [(grid.index(a.x, a.y), 0) for a in st.agents]
                legal = [[int(Move.STAY)] if a.absorbed else list(range(N_MOVES)) for a in st.agents]
                acts = [select_action(tables[i], s[i], legal[i], explore[ep], rng) for i in range(n)]
                after = [env_step(grid, a, act, rng) for a, act in zip(st.agents, acts)]
                rewards, nxt_st = baseline_reward(rule, grid, st, after)
                done = all(a.absorbed for a in after)
                terminal = done or t == params.episode_length - 1
                for i in range(n):
                    a = after[i]
                    nxt = None if terminal else (grid.index(a.x, a.y), 0)
                    nl = [int(Move.STAY)] if a.absorbed else list(range(N_MOVES))
                    update(tables[i], s[i], acts[i], rewards[i], params.gamma, nxt, nl, alpha[ep])
                    returns[ep, i] += rewards[i]
                st = nxt_st
                if done:
                    break
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TrainResult(seed, np.stack([t.values for t in tables]), returns)


# --------------------------------------------------------------------------
# experiments

@dataclass
class ExperimentResult:
    benchmark: str
    mode: str
    curves: list[LearningCurve]
    runs: list[TrainResult]


def _run_one(args):
    grid, mode, seed, params, ldba, rule = args
    return train(grid, mode, seed, params, ldba=ldba, rule=rule)


def run_experiment(bench: Benchmark, mode: str, seeds: Sequence[int],
                   params: Optional[TrainingParams] = None, *, grid: Optional[GridSpec] = None,
                   ldba: Optional[Ldba] = None, base: Optional[Path] = None, workers: int = 1,
                   window: int = DEFAULT_WINDOW) -> ExperimentResult:
    """Train one method on one benchmark for every seed.

    Returns are normalized over all seeds of this method together, then
    smoothed per seed. Seeds run in a process pool when ``workers > 1``;
    results are ordered by seed either way.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not seeds:
        raise ValueError("need at least one seed")
    params = params or TrainingParams(bench.episodes, bench.episode_length)
    grid = grid or bench.load_grid(base)
    if mode == "shaped":
        ldba = ldba or bench.load_automaton(base)
    else:
        ldba = None
    if params.episode_length < grid.diameter():
        log.warning("episode length %d is below the grid diameter %d",
                    params.episode_length, grid.diameter())
    jobs = [(grid, mode, int(s), params, ldba, bench.baseline) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    curves = build_curves([r.returns for r in runs], [r.seed for r in runs], window)
    return ExperimentResult(bench.name, mode, curves, runs)


CSV_HEADER = "episode,seed,agent,raw_return,normalized,smoothed,rolling_std"


def write_csv(path, curves: Sequence[LearningCurve]) -> None:
    """One row per (seed, episode, agent). ``smoothed`` and ``rolling_std``
    describe the agent-averaged curve and repeat on each agent's row."""
    blocks = []
    for c in curves:
        n_ep, n_ag = c.raw.shape
        ep = np.repeat(np.arange(n_ep), n_ag)
        ag = np.tile(np.arange(n_ag), n_ep)
        blocks.append(np.column_stack([
            ep, np.full(ep.shape, c.seed), ag, c.raw.ravel(), c.normalized.ravel(),
            np.repeat(c.smoothed, n_ag), np.repeat(c.rolling_std, n_ag)]))
    data = np.concatenate(blocks) if blocks else np.zeros((0, 7))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, fmt=["%d", "%d", "%d", "%.17g", "%.17g", "%.17g", "%.17g"],
               delimiter=",", header=CSV_HEADER, comments="")


def read_csv(path) -> dict[int, np.ndarray]:
    """Agent-averaged smoothed curve and rolling std per seed, as columns
    ``[episode, smoothed, rolling_std]``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = {}
    for seed in np.unique(data[:, 1]).astype(int):
        rows = data[(data[:, 1] == seed) & (data[:, 2] == 0)]
        out[int(seed)] = rows[:, [0, 5, 6]]
    return out


def with_episodes(params: TrainingParams, episodes: int) -> TrainingParams:
    return replace(params, episodes=episodes)
