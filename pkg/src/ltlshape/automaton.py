"""Runtime semantics of limit-deterministic Buchi automata.

Acceptance is transition based: an edge is accepting iff it is in set 0 of
the HOA document. Loading checks label-determinism by enumerating all
``2**len(aps)`` label sets, and completes partial states with edges into a
trap state (reusing an explicit one if the document already has it).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .hoa import EPSILON_AP, Guard, HoaDocument, eval_guard, read_hoa

MAX_APS = 16

Labels = Union[Iterable[str], int]


class LdbaError(ValueError):
    pass


class DeterminismError(LdbaError):
    pass


@dataclass(frozen=True)
class LabeledEdge:
    guard: Guard
    target: int
    accepting: bool


@dataclass(frozen=True)
class EpsilonMove:
    target: int
    action: int  # global epsilon-action id
    accepting: bool = False


@dataclass(frozen=True)
class AutomatonStepResult:
    state: int
    accepting: bool
    trapped: bool


class Ldba:
    """Immutable LDBA with precomputed label-transition tables.

    ``next_table[q, mask]`` and ``acc_table[q, mask]`` give the successor and
    accepting flag for label bitmask ``mask`` (bit ``i`` is ``aps[i]``).
    """

    def __init__(self, aps, initial, edges, epsilons, trap=None, state_names=None, name=None):
        self.aps: tuple[str, ...] = tuple(aps)
        if len(self.aps) > MAX_APS:
            raise LdbaError(f"at most {MAX_APS} atomic propositions are supported")
        self.initial: int = int(initial)
        self.edges: tuple[tuple[LabeledEdge, ...], ...] = tuple(tuple(e) for e in edges)
        self.epsilons: tuple[tuple[EpsilonMove, ...], ...] = tuple(tuple(e) for e in epsilons)
        self.trap: Optional[int] = trap
        self.n_states = len(self.edges)
        self.state_names = tuple(state_names) if state_names else (None,) * self.n_states
        self.name = name
        self._ap_bit = {a: i for i, a in enumerate(self.aps)}
        self.n_epsilons = sum(len(e) for e in self.epsilons)

        n_masks = 1 << len(self.aps)
        nxt = np.full((self.n_states, n_masks), -1, dtype=np.int64)
        acc = np.zeros((self.n_states, n_masks), dtype=np.bool_)
        for q, out in enumerate(self.edges):
            for mask in range(n_masks):
                labels = {i for i in range(len(self.aps)) if mask >> i & 1}
                hit = [e for e in out if eval_guard(e.guard, labels)]
                if len(hit) > 1:
                    names = sorted(self.aps[i] for i in labels)
                    raise DeterminismError(
                        f"state {q}: {len(hit)} edges enabled for labels {names}")
                if len(hit) == 1:
                    nxt[q, mask] = hit[0].target
                    acc[q, mask] = hit[0].accepting
        if (nxt < 0).any():
            q, mask = map(int, np.argwhere(nxt < 0)[0])
            raise LdbaError(f"state {q} has no edge for label mask {mask}; load() completes automata")
        nxt.flags.writeable = False
        acc.flags.writeable = False
        self.next_table = nxt
        self.acc_table = acc

        eps_next = np.full((self.n_states, max(self.n_epsilons, 1)), -1, dtype=np.int64)
        eps_acc = np.zeros_like(eps_next, dtype=np.bool_)
        seen = set()
        for q, moves in enumerate(self.epsilons):
            for m in moves:
                if m.action in seen:
                    raise LdbaError(f"epsilon action {m.action} declared twice")
                seen.add(m.action)
                eps_next[q, m.action] = m.target
                eps_acc[q, m.action] = m.accepting
        if seen != set(range(self.n_epsilons)):
            raise LdbaError("epsilon action ids must be 0..n-1")
        eps_next.flags.writeable = False
        eps_acc.flags.writeable = False
        self.eps_next = eps_next
        self.eps_acc = eps_acc

        if trap is not None:
            if self.epsilons[trap] or not all(
                    nxt[trap, m] == trap and not acc[trap, m] for m in range(n_masks)):
                raise LdbaError(f"state {trap} is not a trap state")

    def mask_of(self, labels: Labels) -> int:
        if isinstance(labels, (int, np.integer)):
            return int(labels)
        mask = 0
        for a in labels:
            bit = self._ap_bit.get(a)
            if bit is not None:
                mask |= 1 << bit
        return mask

    def n_accepting_edges(self) -> int:
        n = sum(e.accepting for out in self.edges for e in out)
        return n + sum(m.accepting for out in self.epsilons for m in out)

    def __repr__(self) -> str:
        return (f"Ldba(states={self.n_states}, aps={list(self.aps)}, "
                f"epsilons={self.n_epsilons}, trap={self.trap})")


def _strip_epsilon(g: Guard, eps: int, remap: dict[int, int]) -> Guard:
    if g.kind == "ap":
        if g.index == eps:
            raise LdbaError("the epsilon proposition may only appear alone in a guard")
        return Guard.ap(remap[g.index])
    if g.children:
        return Guard(g.kind, children=tuple(_strip_epsilon(c, eps, remap) for c in g.children))
    return g


def _is_trap(edges, eps_moves, q, n_aps) -> bool:
    if eps_moves or not edges:
        return False
    if any(e.target != q or e.accepting for e in edges):
        return False
    for mask in range(1 << n_aps):
        labels = {i for i in range(n_aps) if mask >> i & 1}
        if not any(eval_guard(e.guard, labels) for e in edges):
            return False
    return True


def load(doc: HoaDocument) -> Ldba:
    """Build an :class:`Ldba` from a parsed document.

    Edges guarded by exactly ``[k]`` with ``aps[k] == "__eps__"`` become
    epsilon moves, numbered in document order. States lacking an edge for
    some label set are completed into a trap state.
    """
    eps_idx = doc.aps.index(EPSILON_AP) if EPSILON_AP in doc.aps else -1
    remap = {}
    aps = []
    for i, a in enumerate(doc.aps):
        if i != eps_idx:
            remap[i] = len(aps)
            aps.append(a)
    n_aps = len(aps)
    if n_aps > MAX_APS:
        raise LdbaError(f"at most {MAX_APS} atomic propositions are supported")

    edges: list[list[LabeledEdge]] = []
    epsilons: list[list[EpsilonMove]] = []
    next_eps = 0
    for st in doc.states:
        out, moves = [], []
        for e in st.edges:
            if eps_idx >= 0 and e.guard == Guard.ap(eps_idx):
                moves.append(EpsilonMove(e.target, next_eps, e.accepting))
                next_eps += 1
            else:
                g = _strip_epsilon(e.guard, eps_idx, remap)
                out.append(LabeledEdge(g, e.target, e.accepting))
        edges.append(out)
        epsilons.append(moves)
    names = [st.name for st in doc.states]

    # determinism first, so a nondeterministic document never gets "completed"
    for q, out in enumerate(edges):
        for mask in range(1 << n_aps):
            labels = {i for i in range(n_aps) if mask >> i & 1}
            if sum(eval_guard(e.guard, labels) for e in out) > 1:
                shown = sorted(aps[i] for i in labels)
                raise DeterminismError(f"state {q}: more than one edge enabled for labels {shown}")

    trap = next((q for q in range(len(edges))
                 if q != doc.start and _is_trap(edges[q], epsilons[q], q, n_aps)), None)
    incomplete = []
    for q, out in enumerate(edges):
        for mask in range(1 << n_aps):
            labels = {i for i in range(n_aps) if mask >> i & 1}
            if not any(eval_guard(e.guard, labels) for e in out):
                incomplete.append(q)
                break
    if incomplete:
        if trap is None:
            trap = len(edges)
            edges.append([LabeledEdge(Guard.true(), trap, False)])
            epsilons.append([])
            names.append("trap")
        for q in incomplete:
            out = edges[q]
            if out:
                rest = Guard.not_(Guard.or_(*[e.guard for e in out]) if len(out) > 1 else out[0].guard)
            else:
                rest = Guard.true()
            out.append(LabeledEdge(rest, trap, False))

    return Ldba(aps, doc.start, edges, epsilons, trap=trap, state_names=names, name=doc.name)


def load_file(path) -> Ldba:
    return load(read_hoa(path))


def step_label(a: Ldba, q: int, labels: Labels) -> AutomatonStepResult:
    mask = a.mask_of(labels)
    nq = int(a.next_table[q, mask])
    trapped = nq == a.trap
    return AutomatonStepResult(nq, bool(a.acc_table[q, mask]) and not trapped, trapped)


def step_epsilon(a: Ldba, q: int, eps: int) -> AutomatonStepResult:
    if not 0 <= eps < a.n_epsilons or a.eps_next[q, eps] < 0:
        raise LdbaError(f"epsilon action {eps} is not available in state {q}")
    nq = int(a.eps_next[q, eps])
    trapped = nq == a.trap
    return AutomatonStepResult(nq, bool(a.eps_acc[q, eps]) and not trapped, trapped)


def available_epsilons(a: Ldba, q: int) -> list[int]:
    return [m.action for m in a.epsilons[q]]
