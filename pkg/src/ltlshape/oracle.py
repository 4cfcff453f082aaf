"""Explicit product MDP of one automaton and all agents' gridworlds.

Used to cross-check :mod:`ltlshape.shaping` on small instances. Slip
outcomes, epsilon-conflict resolution and the reward rule are re-encoded
here on purpose instead of being imported, so a bug in one encoding shows
up as a divergence rather than being shared by both.

Randomness coupling: each agent owns one random stream. An agent that
actually moves (not absorbed, not standing still for an epsilon action)
consumes exactly one uniform from its stream, mapped to an outcome by
inverse CDF over the outcome list in this order: commanded direction, then
the remaining directions among N, S, E, W.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .automaton import Ldba
from .gridworld import GridSpec

STAY = 4
_DIRS = ((0, -1), (0, 1), (1, 0), (-1, 0))  # N, S, E, W
DEFAULT_STATE_CAP = 10**6


class ProductError(ValueError):
    pass


class StateCapExceeded(ProductError):
    pass


@dataclass(frozen=True)
class ProductOutcome:
    prob: float
    state: int
    reward: float
    discount: float
    accepting: bool
    trapped: bool


@dataclass(frozen=True)
class ProductTransition:
    # per agent: ((prob, next_cell), ...) or None when the agent cannot move
    factors: tuple[Optional[tuple[tuple[float, int], ...]], ...]
    outcomes: tuple[ProductOutcome, ...]  # lexicographic over factor slots


@dataclass
class ProductMdp:
    ldba: Ldba
    grids: tuple[GridSpec, ...]
    gamma: float
    gamma_b: float
    trap_reward: float
    dims: tuple[int, ...]  # cells per agent, then automaton states
    initial: int
    actions: dict[int, tuple[tuple[int, ...], ...]] = field(default_factory=dict)
    transitions: dict[tuple[int, tuple[int, ...]], ProductTransition] = field(default_factory=dict)

    @property
    def n_states(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_agents(self) -> int:
        return len(self.grids)

    def encode(self, cells: Sequence[int], q: int) -> int:
        idx = 0
        for v, d in zip((*cells, q), self.dims):
            idx = idx * d + v
        return idx

    def decode(self, idx: int) -> tuple[tuple[int, ...], int]:
        out = []
        for d in reversed(self.dims):
            out.append(idx % d)
            idx //= d
        out.reverse()
        return tuple(out[:-1]), out[-1]

    def trap_states(self) -> set[int]:
        if self.ldba.trap is None:
            return set()
        return {s for s in range(self.n_states) if self.decode(s)[1] == self.ldba.trap}

    def accepting_states(self) -> set[int]:
        """Product states whose automaton state has an accepting edge."""
        acc_q = {q for q in range(self.ldba.n_states)
                 if self.ldba.acc_table[q].any() or self.ldba.eps_acc[q].any()}
        return {s for s in range(self.n_states) if self.decode(s)[1] in acc_q}

    def accepting_transitions(self) -> set[tuple[int, tuple[int, ...], int]]:
        return {(s, a, o.state) for (s, a), tr in self.transitions.items()
                for o in tr.outcomes if o.accepting}


def _goal(grid: GridSpec, cell: int) -> bool:
    return any(ap.startswith("g") for ap in grid.cell_labels[cell])


def _slip_outcomes(grid: GridSpec, cell: int, action: int) -> tuple[tuple[float, int], ...]:
    x, y = cell % grid.width, cell // grid.width
    if action == STAY:
        order = [STAY, 0, 1, 2, 3]
    else:
        order = [action] + [d for d in range(4) if d != action]
    p_other = (1.0 - grid.slip) / (len(order) - 1)
    out = []
    for k, d in enumerate(order):
        if d == STAY:
            nx, ny = x, y
        else:
            nx, ny = x + _DIRS[d][0], y + _DIRS[d][1]
            if not (0 <= nx < grid.width and 0 <= ny < grid.height) \
                    or ((x, y), (nx, ny)) in grid.blocked:
                nx, ny = x, y
        out.append((grid.slip if k == 0 else p_other, ny * grid.width + nx))
    return tuple(out)


def _agent_actions(ldba: Ldba, grid: GridSpec, cell: int, q: int) -> tuple[int, ...]:
    moves = (STAY,) if _goal(grid, cell) else (0, 1, 2, 3, 4)
    eps = tuple(5 + e for e in range(ldba.n_epsilons) if ldba.eps_next[q, e] >= 0)
    return moves + eps


def build_product(ldba: Ldba, grids: Sequence[GridSpec], gamma: float = 0.999,
                  gamma_b: float = 0.99, trap_reward: float = -1.0,
                  state_cap: int = DEFAULT_STATE_CAP) -> ProductMdp:
    """Enumerate every product state and every legal joint action."""
    grids = tuple(grids)
    dims = tuple(g.n_cells for g in grids) + (ldba.n_states,)
    total = int(np.prod(dims, dtype=object))
    if total > state_cap:
        raise StateCapExceeded(f"product has {total} states, above the cap of {state_cap}")
    bits = {ap: 1 << i for i, ap in enumerate(ldba.aps)}
    masks = []
    for g in grids:
        unknown = g.alphabet - set(bits)
        if unknown:
            raise ProductError(f"labels {sorted(unknown)} are not in the automaton alphabet")
        masks.append([sum(bits[ap] for ap in labs) for labs in g.cell_labels])

    start_cells = [g.index(*g.starts[i]) for i, g in enumerate(grids)]
    m = ProductMdp(ldba, grids, gamma, gamma_b, trap_reward, dims, 0)
    m.initial = m.encode(start_cells, ldba.initial)

    for cells_q in itertools.product(*(range(d) for d in dims)):
        cells, q = cells_q[:-1], cells_q[-1]
        s = m.encode(cells, q)
        per_agent = [_agent_actions(ldba, g, c, q) for g, c in zip(grids, cells)]
        joint = tuple(itertools.product(*per_agent))
        m.actions[s] = joint
        for act in joint:
            eps = next((a - 5 for a in act if a >= 5), None)
            factors = []
            for g, c, a in zip(grids, cells, act):
                if a >= 5 or _goal(g, c):
                    factors.append(None)
                else:
                    factors.append(_slip_outcomes(g, c, a))
            slots = [f if f is not None else ((1.0, c),) for f, c in zip(factors, cells)]
            outcomes = []
            for combo in itertools.product(*slots):
                prob = 1.0
                for p, _ in combo:
                    prob *= p
                new_cells = tuple(c for _, c in combo)
                mask = 0
                for i, c in enumerate(new_cells):
                    mask |= masks[i][c]
                qq, acc = q, False
                if eps is not None:
                    acc = bool(ldba.eps_acc[q, eps])
                    qq = int(ldba.eps_next[q, eps])
                acc = acc or bool(ldba.acc_table[qq, mask])
                qn = int(ldba.next_table[qq, mask])
                if ldba.trap is not None and qn == ldba.trap:
                    r, disc, acc, trapped = trap_reward, gamma, False, True
                else:
                    trapped = False
                    r, disc = (1.0 - gamma_b, gamma_b) if acc else (0.0, gamma)
                outcomes.append(ProductOutcome(prob, m.encode(new_cells, qn), r, disc, acc, trapped))
            m.transitions[(s, act)] = ProductTransition(tuple(factors), tuple(outcomes))
    return m


def check_distributions(m: ProductMdp, tol: float = 1e-9) -> None:
    for key, tr in m.transitions.items():
        total = sum(o.prob for o in tr.outcomes)
        if abs(total - 1.0) > tol:
            raise ProductError(f"transition {key} sums to {total}")


@dataclass(frozen=True)
class ProductStep:
    state: int
    reward: float
    discount: float
    accepting: bool
    trapped: bool


def product_step(m: ProductMdp, state: int, action: Sequence[int], rngs) -> ProductStep:
    action = tuple(int(a) for a in action)
    tr = m.transitions.get((state, action))
    if tr is None:
        raise ProductError(f"action {action} is not legal in product state {state}")
    if hasattr(rngs, "random"):
        rngs = [rngs] * m.n_agents
    index = 0
    for f, rng in zip(tr.factors, rngs):
        if f is None:
            continue  # single slot, nothing drawn
        u = rng.random()
        cum = np.cumsum([p for p, _ in f])
        k = int(np.searchsorted(cum, u, side="right"))
        index = index * len(f) + min(k, len(f) - 1)
    o = tr.outcomes[index]
    return ProductStep(o.state, o.reward, o.discount, o.accepting, o.trapped)


def simulate_product(m: ProductMdp, actions: Sequence[Sequence[int]], rng) -> list[ProductStep]:
    """Run a joint action sequence from the initial state.

    The first trace entry is the initial state with zero reward. Stepping
    after the trap was entered is an error.
    """
    trace = [ProductStep(m.initial, 0.0, m.gamma, False, False)]
    for act in actions:
        if trace[-1].trapped:
            raise ProductError("episode already terminated in the trap state")
        trace.append(product_step(m, trace[-1].state, act, rng))
    return trace


# --------------------------------------------------------------------------
# trajectory-wise comparison with the shaping runtime

@dataclass(frozen=True)
class Divergence:
    step: int
    seed: int
    shaping: tuple
    product: tuple
    what: str


@dataclass(frozen=True)
class EquivalenceReport:
    seed: int
    steps: int
    divergence: Optional[Divergence] = None

    @property
    def ok(self) -> bool:
        return self.divergence is None

    def format(self) -> str:
        if self.ok:
            return f"seed {self.seed}: {self.steps} steps, no divergence"
        d = self.divergence
        return (f"seed {self.seed}: divergence at step {d.step} ({d.what})\n"
                f"  shaping: {d.shaping}\n  product: {d.product}")


def check_equivalence(ldba: Ldba, grids: Sequence[GridSpec], n_steps: int, seed: int,
                      episode_length: int = 100, gamma: float = 0.999, gamma_b: float = 0.99,
                      trap_reward: float = -1.0, epsilon_first: bool = True,
                      product: Optional[ProductMdp] = None,
                      state_cap: int = DEFAULT_STATE_CAP) -> EquivalenceReport:
    """Drive the shaping runtime and the product MDP with identical actions
    and coupled per-agent random streams; report the first mismatch in
    (cells, automaton state, reward, discount, accepting flag)."""
    from . import shaping

    grids = tuple(grids)
    m = product or build_product(ldba, grids, gamma, gamma_b, trap_reward, state_cap)
    cfg = shaping.ShapingConfig(ldba, grids, gamma, gamma_b, trap_reward, epsilon_first)
    n = len(grids)
    children = np.random.SeedSequence(seed).spawn(n + 1)
    sh_rngs = [np.random.default_rng(c) for c in children[:n]]
    pr_rngs = [np.random.default_rng(c) for c in children[:n]]
    pick = np.random.default_rng(children[n])

    def cells_of(st):
        return tuple(g.index(a.x, a.y) for g, a in zip(grids, st.agents))

    sh = shaping.reset(cfg)
    ps = m.initial
    t_ep = 0
    for t in range(n_steps):
        legal = [shaping.augmented_actions(sh, i, cfg) for i in range(n)]
        joint_legal = set(itertools.product(*legal))
        if joint_legal != set(m.actions[ps]):
            return EquivalenceReport(seed, t, Divergence(
                t, seed, (cells_of(sh), sh.q, sorted(joint_legal)),
                (*m.decode(ps), sorted(m.actions[ps])), "legal actions"))
        act = tuple(ls[int(pick.integers(len(ls)))] for ls in legal)
        out = shaping.joint_step(sh, act, cfg, sh_rngs)
        pst = product_step(m, ps, act, pr_rngs)
        a = (cells_of(out.state), out.state.q, out.reward, out.discount, out.accepting)
        cells, q = m.decode(pst.state)
        b = (cells, q, pst.reward, pst.discount, pst.accepting)
        if a != b or out.trapped != pst.trapped:
            return EquivalenceReport(seed, t, Divergence(t, seed, a + (act,), b + (act,), "step"))
        sh, ps = out.state, pst.state
        t_ep += 1
        if out.trapped or t_ep >= episode_length:
            sh = shaping.reset(cfg)
            ps = m.initial
            t_ep = 0
    return EquivalenceReport(seed, n_steps)
