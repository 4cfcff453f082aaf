"""Semi-centralized reward shaping over one shared automaton state.

Every agent keeps its own gridworld, but all agents see the same automaton
state ``q`` and receive the same shaped reward. Per joint step:

1. actions are split into environment moves and epsilon actions;
2. if several agents chose an epsilon action, the lowest-indexed agent's
   choice is applied and the others are discarded; every agent that chose an
   epsilon action stands still this step;
3. the remaining agents take one environment step each;
4. the labels of all agents' new cells are unioned;
5. the automaton applies the epsilon move (if any) and then the label move;
6. reward is ``1 - gamma_b`` with discount ``gamma_b`` if either automaton
   move was accepting, else ``0`` with discount ``gamma``; entering the trap
   gives ``trap_reward`` and ends the episode.

Actions are plain ints: ``0..4`` are :class:`~ltlshape.gridworld.Move`
values, ``N_MOVES + k`` is epsilon action ``k`` of the automaton.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .automaton import Ldba, available_epsilons, step_epsilon, step_label
from .gridworld import N_MOVES, AgentState, GridSpec, Move, env_step, labels_of

EPS_OFFSET = N_MOVES


class ShapingError(ValueError):
    pass


def is_epsilon(action: int) -> bool:
    return action >= EPS_OFFSET


def epsilon_action(eps_id: int) -> int:
    return EPS_OFFSET + eps_id


@dataclass(frozen=True)
class ShapingConfig:
    ldba: Ldba
    grids: tuple[GridSpec, ...]
    gamma: float = 0.999
    gamma_b: float = 0.99
    trap_reward: float = -1.0
    # False swaps the automaton update order; only used to check that the
    # product-MDP comparison notices the difference
    epsilon_first: bool = True

    def __post_init__(self):
        if not 0.0 < self.gamma_b <= self.gamma < 1.0:
            raise ShapingError(f"need 0 < gamma_b <= gamma < 1, got gamma={self.gamma}, "
                               f"gamma_b={self.gamma_b}")

    @property
    def n_agents(self) -> int:
        return len(self.grids)


@dataclass(frozen=True)
class JointShapingState:
    agents: tuple[AgentState, ...]
    q: int
    terminated: bool = False
    step: int = 0


@dataclass(frozen=True)
class JointStepOutcome:
    state: JointShapingState
    reward: float
    discount: float
    accepting: bool
    trapped: bool
    epsilon: Optional[int] = None
    labels: frozenset = field(default_factory=frozenset)


def check_alphabet(cfg: ShapingConfig) -> None:
    known = set(cfg.ldba.aps)
    for i, g in enumerate(cfg.grids):
        extra = sorted(g.alphabet - known)
        if extra:
            raise ShapingError(f"grid of agent {i} uses labels {extra} "
                               f"missing from the automaton alphabet {sorted(known)}")
        if len(g.starts) <= i:
            raise ShapingError(f"grid of agent {i} declares no start cell for it")


def reset(cfg: ShapingConfig) -> JointShapingState:
    check_alphabet(cfg)
    agents = tuple(g.start_state(i) for i, g in enumerate(cfg.grids))
    return JointShapingState(agents, cfg.ldba.initial)


def augmented_actions(state: JointShapingState, agent: int, cfg: ShapingConfig) -> list[int]:
    """Legal actions of ``agent``: its moves (only STAY once absorbed) plus
    the epsilon actions available in the shared automaton state."""
    moves = [int(Move.STAY)] if state.agents[agent].absorbed else list(range(N_MOVES))
    return moves + [epsilon_action(e) for e in available_epsilons(cfg.ldba, state.q)]


def _agent_rngs(rng, n):
    if hasattr(rng, "random"):
        return [rng] * n
    rngs = list(rng)
    if len(rngs) != n:
        raise ShapingError(f"expected {n} random streams, got {len(rngs)}")
    return rngs


def joint_step(state: JointShapingState, actions: Sequence[int], cfg: ShapingConfig,
               rng) -> JointStepOutcome:
    """One synchronized step for all agents.

    ``rng`` is either one generator shared by all agents (drawn in agent
    order) or a sequence with one generator per agent.
    """
    n = cfg.n_agents
    if len(actions) != n:
        raise ShapingError(f"expected {n} actions, got {len(actions)}")
    if state.terminated:
        raise ShapingError("episode already terminated; call reset()")
    rngs = _agent_rngs(rng, n)
    ldba = cfg.ldba

    chosen = None
    for a in actions:
        if is_epsilon(a):
            eps = a - EPS_OFFSET
            if eps not in available_epsilons(ldba, state.q):
                raise ShapingError(f"epsilon action {eps} not available in state {state.q}")
            if chosen is None:
                chosen = eps

    agents = []
    for i, (s, a) in enumerate(zip(state.agents, actions)):
        if is_epsilon(a):
            agents.append(s)
        else:
            agents.append(env_step(cfg.grids[i], s, a, rngs[i]))
    labels = frozenset().union(*(labels_of(g, s) for g, s in zip(cfg.grids, agents)))

    q = state.q
    accepting = False
    if cfg.epsilon_first:
        if chosen is not None:
            res = step_epsilon(ldba, q, chosen)
            accepting |= res.accepting
            q = res.state
        res = step_label(ldba, q, labels)
        accepting |= res.accepting
        q = res.state
    else:
        res = step_label(ldba, q, labels)
        accepting |= res.accepting
        q = res.state
        if chosen is not None and chosen in available_epsilons(ldba, q):
            res = step_epsilon(ldba, q, chosen)
            accepting |= res.accepting
            q = res.state

    trapped = ldba.trap is not None and q == ldba.trap
    if trapped:
        reward, discount, accepting = cfg.trap_reward, cfg.gamma, False
    elif accepting:
        reward, discount = 1.0 - cfg.gamma_b, cfg.gamma_b
    else:
        reward, discount = 0.0, cfg.gamma

    nxt = JointShapingState(tuple(agents), q, trapped, state.step + 1)
    return JointStepOutcome(nxt, reward, discount, accepting, trapped, chosen, labels)
