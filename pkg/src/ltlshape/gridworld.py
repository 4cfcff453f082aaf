"""Labeled slippery gridworld, one per agent.

Coordinates are ``(x, y)`` with ``y`` growing downwards, so NORTH is ``y - 1``.
A commanded move succeeds with probability ``slip``; otherwise the agent
tries one of the other movement directions, chosen uniformly (three for a
move, four for STAY). Moves into a wall or off the grid leave the agent in
place. Cells whose label set contains a proposition starting with ``g`` are
goals: an agent that enters one is absorbed for the rest of the episode.

Grid files (``.grid``)::

    # comment
    slip: 0.8
    layout:
        a . . .
        . . . g
    legend:
        . =
        a = a
        g = g1
    walls:
        v 2 0 2      # vertical line at x=2 over rows 0..1
        h 1 0 1      # horizontal line at y=1 over column 0
    starts:
        0 1          # agent 0 at x=0, y=1
        3 1

Layout glyphs are single non-space characters separated by blanks, one row
per line. Every glyph must appear in the legend; a legend value is a
comma-separated list of proposition names (empty for no labels).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import NamedTuple, Optional, Sequence


class GridError(ValueError):
    pass


class Move(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3
    STAY = 4


N_MOVES = 5
DELTAS = {Move.NORTH: (0, -1), Move.SOUTH: (0, 1), Move.EAST: (1, 0),
          Move.WEST: (-1, 0), Move.STAY: (0, 0)}
_DIRECTIONS = (Move.NORTH, Move.SOUTH, Move.EAST, Move.WEST)


class AgentState(NamedTuple):
    x: int
    y: int
    absorbed: bool = False

    @property
    def cell(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True)
class WallSegment:
    """Straight wall on grid lines.

    ``orient == "v"``: the line ``x = pos`` for rows ``start <= y < end``;
    blocks moves between ``(pos - 1, y)`` and ``(pos, y)``.
    ``orient == "h"``: the line ``y = pos`` for columns ``start <= x < end``.
    """

    orient: str
    pos: int
    start: int
    end: int

    def blocked_pairs(self):
        for k in range(self.start, self.end):
            if self.orient == "v":
                yield (self.pos - 1, k), (self.pos, k)
            else:
                yield (k, self.pos - 1), (k, self.pos)


def is_goal_label(ap: str) -> bool:
    return ap.startswith("g")


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    cell_labels: tuple[frozenset, ...]  # row-major, index y * width + x
    walls: tuple[WallSegment, ...] = ()
    starts: tuple[tuple[int, int], ...] = ()
    slip: float = 0.8
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise GridError("grid must have at least one cell")
        if len(self.cell_labels) != self.width * self.height:
            raise GridError("cell_labels must have width * height entries")
        if not 0.0 <= self.slip <= 1.0:
            raise GridError(f"slip probability {self.slip} outside [0, 1]")
        for i, (x, y) in enumerate(self.starts):
            if not self.in_bounds(x, y):
                raise GridError(f"start of agent {i} at ({x}, {y}) is out of bounds")
        for w in self.walls:
            if w.orient not in ("v", "h"):
                raise GridError(f"wall orientation must be 'v' or 'h', got {w.orient!r}")
            lim_pos, lim_span = (self.width, self.height) if w.orient == "v" else (self.height, self.width)
            if not (1 <= w.pos <= lim_pos - 1 and 0 <= w.start < w.end <= lim_span):
                raise GridError(f"wall {w} is out of bounds")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def index(self, x: int, y: int) -> int:
        return y * self.width + x

    def coords(self, idx: int) -> tuple[int, int]:
        return idx % self.width, idx // self.width

    def labels_at(self, x: int, y: int) -> frozenset:
        return self.cell_labels[self.index(x, y)]

    def is_goal(self, x: int, y: int) -> bool:
        return any(is_goal_label(a) for a in self.labels_at(x, y))

    @cached_property
    def blocked(self) -> frozenset:
        pairs = set()
        for w in self.walls:
            for a, b in w.blocked_pairs():
                pairs.add((a, b))
                pairs.add((b, a))
        return frozenset(pairs)

    @cached_property
    def alphabet(self) -> frozenset:
        out: set = set()
        for s in self.cell_labels:
            out |= s
        return frozenset(out)

    def neighbor(self, x: int, y: int, d: Move) -> tuple[int, int]:
        """Cell reached by moving ``d`` from ``(x, y)``, with walls applied."""
        dx, dy = DELTAS[Move(d)]
        nx, ny = x + dx, y + dy
        if not self.in_bounds(nx, ny) or ((x, y), (nx, ny)) in self.blocked:
            return x, y
        return nx, ny

    def start_state(self, agent: int) -> AgentState:
        x, y = self.starts[agent]
        return AgentState(x, y, self.is_goal(x, y))

    def diameter(self) -> int:
        """Longest shortest path between reachable cells (BFS)."""
        best = 0
        for src in range(self.n_cells):
            dist = {src: 0}
            frontier = [src]
            while frontier:
                nxt = []
                for c in frontier:
                    x, y = self.coords(c)
                    for d in _DIRECTIONS:
                        n = self.index(*self.neighbor(x, y, d))
                        if n not in dist:
                            dist[n] = dist[c] + 1
                            nxt.append(n)
                frontier = nxt
            best = max(best, max(dist.values()))
        return best


def slip_distribution(slip: float, action: int) -> list[tuple[Move, float]]:
    """Outcome directions with probabilities, commanded direction first.

    The order is the one :func:`env_step` samples in, so it also fixes how a
    uniform draw maps to an outcome.
    """
    a = Move(action)
    others = [d for d in _DIRECTIONS if d != a]
    q = (1.0 - slip) / len(others)
    return [(a, slip)] + [(d, q) for d in others]


def sample_index(probs: Sequence[float], u: float) -> int:
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    return len(probs) - 1


def env_step(spec: GridSpec, s: AgentState, a: int, rng) -> AgentState:
    """Advance one agent. Draws exactly one ``rng.random()`` unless absorbed."""
    if s.absorbed:
        return s
    if not 0 <= a < N_MOVES:
        raise GridError(f"{a} is not an environment action")
    dist = slip_distribution(spec.slip, a)
    k = sample_index([p for _, p in dist], rng.random())
    x, y = spec.neighbor(s.x, s.y, dist[k][0])
    return AgentState(x, y, spec.is_goal(x, y))


def labels_of(spec: GridSpec, s: AgentState) -> frozenset:
    return spec.labels_at(s.x, s.y)


# --------------------------------------------------------------------------
# .grid text format

_SECTIONS = ("layout", "legend", "walls", "starts")


def parse_grid(text: str, name: Optional[str] = None) -> GridSpec:
    slip = None
    blocks: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if not raw[0].isspace():
            key, sep, rest = line.partition(":")
            key = key.strip()
            if not sep:
                raise GridError(f"line {lineno}: expected 'key:'")
            if key == "slip":
                try:
                    slip = float(rest)
                except ValueError:
                    raise GridError(f"line {lineno}: bad slip probability {rest.strip()!r}") from None
                current = None
            elif key in _SECTIONS:
                if key in blocks:
                    raise GridError(f"line {lineno}: duplicate section {key!r}")
                if rest.strip():
                    raise GridError(f"line {lineno}: section {key!r} takes an indented block")
                blocks[key] = []
                current = key
            else:
                raise GridError(f"line {lineno}: unknown key {key!r}")
        else:
            if current is None:
                raise GridError(f"line {lineno}: indented line outside a section")
            blocks[current].append((lineno, line.strip()))

    if slip is None:
        raise GridError("missing 'slip:'")
    for key in ("layout", "legend", "starts"):
        if key not in blocks or not blocks[key]:
            raise GridError(f"missing or empty section {key!r}")

    legend: dict[str, frozenset] = {}
    for lineno, line in blocks["legend"]:
        glyph, eq, value = line.partition("=")
        glyph = glyph.strip()
        if not eq or len(glyph) != 1:
            raise GridError(f"line {lineno}: malformed legend entry {line!r}")
        if glyph in legend:
            raise GridError(f"line {lineno}: glyph {glyph!r} defined twice")
        names = [v.strip() for v in value.split(",") if v.strip()]
        for v in names:
            if not v.replace("_", "").isalnum():
                raise GridError(f"line {lineno}: bad proposition name {v!r}")
        legend[glyph] = frozenset(names)

    rows = []
    for lineno, line in blocks["layout"]:
        glyphs = line.split()
        for g in glyphs:
            if len(g) != 1:
                raise GridError(f"line {lineno}: glyphs must be single characters, got {g!r}")
            if g not in legend:
                raise GridError(f"line {lineno}: glyph {g!r} is not in the legend")
        rows.append((lineno, glyphs))
    width = len(rows[0][1])
    for lineno, glyphs in rows:
        if len(glyphs) != width:
            raise GridError(f"line {lineno}: row has {len(glyphs)} cells, expected {width}")
    labels = tuple(legend[g] for _, glyphs in rows for g in glyphs)

    walls = []
    for lineno, line in blocks.get("walls", []):
        parts = line.split()
        try:
            orient, pos, start, end = parts[0], *map(int, parts[1:])
        except (ValueError, IndexError, TypeError):
            raise GridError(f"line {lineno}: wall must be 'v|h pos start end'") from None
        if len(parts) != 4:
            raise GridError(f"line {lineno}: wall must be 'v|h pos start end'")
        walls.append(WallSegment(orient, pos, start, end))

    starts = []
    for lineno, line in blocks["starts"]:
        try:
            x, y = map(int, line.split())
        except ValueError:
            raise GridError(f"line {lineno}: start must be 'x y'") from None
        starts.append((x, y))

    return GridSpec(width, len(rows), labels, tuple(walls), tuple(starts), slip, name=name)


def read_grid(path) -> GridSpec:
    from pathlib import Path

    p = Path(path)
    return parse_grid(p.read_text(encoding="utf-8"), name=p.stem)


_GLYPHS = "abcdefhijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


def serialize_grid(spec: GridSpec) -> str:
    sets = sorted({s for s in spec.cell_labels if s}, key=lambda s: sorted(s))
    glyph_of = {frozenset(): "."}
    used = {"."}
    for s in sets:
        # prefer the first letter of a single-proposition set
        first = sorted(s)[0][0]
        g = first if len(s) == 1 and first not in used and first in _GLYPHS else None
        if g is None:
            g = next(c for c in _GLYPHS if c not in used)
        glyph_of[s] = g
        used.add(g)
    lines = [f"slip: {spec.slip!r}", "layout:"]
    for y in range(spec.height):
        row = [glyph_of[spec.labels_at(x, y)] for x in range(spec.width)]
        lines.append("    " + " ".join(row))
    lines.append("legend:")
    for s, g in sorted(glyph_of.items(), key=lambda kv: kv[1]):
        lines.append(f"    {g} = {', '.join(sorted(s))}".rstrip())
    if spec.walls:
        lines.append("walls:")
        for w in spec.walls:
            lines.append(f"    {w.orient} {w.pos} {w.start} {w.end}")
    lines.append("starts:")
    for x, y in spec.starts:
        lines.append(f"    {x} {y}")
    return "\n".join(lines) + "\n"
