"""Training loops over integer-encoded tables.

Compiled with numba when available (see :mod:`ltlshape._jit`). The same
source runs as plain Python otherwise; both draw from numpy's legacy MT19937
stream via ``np.random.random()`` and produce identical tables.

Draw order per step: for each agent one uniform for the explore test and a
second one if exploring; then, for each agent that moves, one uniform for
its slip outcome. This matches :func:`ltlshape.learner.select_action`
followed by :func:`ltlshape.shaping.joint_step`.
"""
import numpy as np

from .._jit import njit

STAY = 4
N_MOVES = 5
RULE_SYNC = 0
RULE_FLAGS = 1


@njit(cache=True)
def _select(row, legal, n_legal, explore):
    if np.random.random() < explore:
        return legal[int(np.random.random() * n_legal)]
    best = legal[0]
    for k in range(1, n_legal):
        a = legal[k]
        if row[a] > row[best]:
            best = a
    return best


@njit(cache=True)
def _fill_legal(legal, absorbed, eps_row):
    n = 0
    if absorbed:
        legal[0] = STAY
        n = 1
    else:
        for a in range(N_MOVES):
            legal[a] = a
        n = N_MOVES
    for e in range(eps_row.shape[0]):
        if eps_row[e] >= 0:
            legal[n] = N_MOVES + e
            n += 1
    return n


@njit(cache=True)
def _move(cell, a, move_next, slip_dir, slip_cum, slip_n):
    u = np.random.random()
    k = 0
    while k < slip_n[a] - 1 and u >= slip_cum[a, k]:
        k += 1
    return move_next[cell, slip_dir[a, k]]


@njit(cache=True)
def train_shaped(Q, returns, starts, goal, cell_mask, move_next, slip_dir, slip_cum, slip_n,
                 lab_next, lab_acc, eps_next, eps_acc, q0, trap,
                 gamma, gamma_b, trap_reward, explore, alpha, ep_len, seed):
    """Independent Q-learning on (cell, automaton state) with shaped reward.

    ``Q[i, cell, q, action]`` and ``returns[episode, i]`` are updated in place.
    ``eps_next[q, e] < 0`` marks an unavailable epsilon action; ``trap < 0``
    means the automaton has no trap state.
    """
    np.random.seed(seed)
    n_agents = starts.shape[0]
    n_actions = Q.shape[3]
    legal = np.empty((n_agents, n_actions), dtype=np.int64)
    n_legal = np.empty(n_agents, dtype=np.int64)
    cells = np.empty(n_agents, dtype=np.int64)
    new = np.empty(n_agents, dtype=np.int64)
    acts = np.empty(n_agents, dtype=np.int64)
    for ep in range(explore.shape[0]):
        ex = explore[ep]
        al = alpha[ep]
        for i in range(n_agents):
            cells[i] = starts[i]
        q = q0
        for t in range(ep_len):
            for i in range(n_agents):
                n_legal[i] = _fill_legal(legal[i], goal[cells[i]], eps_next[q])
                acts[i] = _select(Q[i, cells[i], q], legal[i], n_legal[i], ex)
            chosen = -1
            for i in range(n_agents):
                if acts[i] >= N_MOVES and chosen < 0:
                    chosen = acts[i] - N_MOVES
            mask = 0
            for i in range(n_agents):
                c = cells[i]
                if acts[i] < N_MOVES and not goal[c]:
                    c = _move(c, acts[i], move_next, slip_dir, slip_cum, slip_n)
                new[i] = c
                mask |= cell_mask[c]
            acc = False
            qq = q
            if chosen >= 0:
                acc = eps_acc[q, chosen]
                qq = eps_next[q, chosen]
            if lab_acc[qq, mask]:
                acc = True
            qn = lab_next[qq, mask]
            trapped = qn == trap
            if trapped:
                r = trap_reward
                g = gamma
            elif acc:
                r = 1.0 - gamma_b
                g = gamma_b
            else:
                r = 0.0
                g = gamma
            terminal = trapped or t == ep_len - 1
            for i in range(n_agents):
                boot = 0.0
                if not terminal:
                    nl = _fill_legal(legal[i], goal[new[i]], eps_next[qn])
                    row = Q[i, new[i], qn]
                    boot = row[legal[i, 0]]
                    for k in range(1, nl):
                        if row[legal[i, k]] > boot:
                            boot = row[legal[i, k]]
                old = Q[i, cells[i], q, acts[i]]
                Q[i, cells[i], q, acts[i]] = old + al * (r + g * boot - old)
                returns[ep, i] += r
            for i in range(n_agents):
                cells[i] = new[i]
            q = qn
            if trapped:
                break


@njit(cache=True)
def train_baseline(Q, returns, starts, goal, cell_mask, move_next, slip_dir, slip_cum, slip_n,
                   rule, bit_a, bit_b, sync_reward, goal_reward,
                   gamma, explore, alpha, ep_len, seed):
    """Independent Q-learning on cells only, with hand-written event rewards.

    ``rule == RULE_SYNC``: ``sync_reward`` to every agent the first time the
    joint labels contain both ``a`` and ``b``. ``rule == RULE_FLAGS``:
    ``sync_reward`` to each agent standing on a flag the first time that flag
    is seen. Either way ``goal_reward`` to an agent on its first arrival at a
    goal. The episode ends once every agent is absorbed.
    """
    np.random.seed(seed)
    n_agents = starts.shape[0]
    legal = np.empty((n_agents, N_MOVES), dtype=np.int64)
    n_legal = np.empty(n_agents, dtype=np.int64)
    cells = np.empty(n_agents, dtype=np.int64)
    new = np.empty(n_agents, dtype=np.int64)
    acts = np.empty(n_agents, dtype=np.int64)
    arrived = np.empty(n_agents, dtype=np.bool_)
    rew = np.empty(n_agents, dtype=np.float64)
    no_eps = np.full(0, -1, dtype=np.int64)
    both = bit_a | bit_b
    for ep in range(explore.shape[0]):
        ex = explore[ep]
        al = alpha[ep]
        for i in range(n_agents):
            cells[i] = starts[i]
            arrived[i] = goal[starts[i]]
        synced = False
        collected = 0
        for t in range(ep_len):
            for i in range(n_agents):
                n_legal[i] = _fill_legal(legal[i], goal[cells[i]], no_eps)
                acts[i] = _select(Q[i, cells[i], 0], legal[i], n_legal[i], ex)
            mask = 0
            for i in range(n_agents):
                c = cells[i]
                if not goal[c]:
                    c = _move(c, acts[i], move_next, slip_dir, slip_cum, slip_n)
                new[i] = c
                mask |= cell_mask[c]
            for i in range(n_agents):
                rew[i] = 0.0
            if rule == RULE_SYNC:
                if not synced and bit_a != 0 and bit_b != 0 and (mask & both) == both:
                    synced = True
                    for i in range(n_agents):
                        rew[i] += sync_reward
            else:
                for f in (bit_a, bit_b):
                    if f != 0 and (collected & f) == 0 and (mask & f) != 0:
                        collected |= f
                        for i in range(n_agents):
                            if cell_mask[new[i]] & f:
                                rew[i] += sync_reward
            done = True
            for i in range(n_agents):
                if goal[new[i]] and not arrived[i]:
                    arrived[i] = True
                    rew[i] += goal_reward
                if not goal[new[i]]:
                    done = False
            terminal = done or t == ep_len - 1
            for i in range(n_agents):
                boot = 0.0
                if not terminal:
                    nl = _fill_legal(legal[i], goal[new[i]], no_eps)
                    row = Q[i, new[i], 0]
                    boot = row[legal[i, 0]]
                    for k in range(1, nl):
                        if row[legal[i, k]] > boot:
                            boot = row[legal[i, k]]
                old = Q[i, cells[i], 0, acts[i]]
                Q[i, cells[i], 0, acts[i]] = old + al * (rew[i] + gamma * boot - old)
                returns[ep, i] += rew[i]
            for i in range(n_agents):
                cells[i] = new[i]
            if done:
                break
