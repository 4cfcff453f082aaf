from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from ltlshape.gridworld import (AgentState, GridError, GridSpec, Move, WallSegment, env_step,
                                parse_grid, read_grid, serialize_grid, slip_distribution)

from conftest import DATA, GRID_FIXTURES

GOLDEN = Path(__file__).parent / "golden"


def _outcome(s: AgentState, n: AgentState) -> Move:
    d = (n.x - s.x, n.y - s.y)
    return {(0, -1): Move.NORTH, (0, 1): Move.SOUTH, (1, 0): Move.EAST,
            (-1, 0): Move.WEST, (0, 0): Move.STAY}[d]


def test_buttons_grid(buttons_grid):
    g = buttons_grid
    assert (g.width, g.height) == (7, 5)
    assert g.alphabet == {"a", "b", "g1", "g2"}
    assert len(g.walls) == 1
    assert g.labels_at(6, 4) == {"b"}
    assert g.labels_at(3, 0) == {"g1"}
    assert g.is_goal(3, 0) and not g.is_goal(0, 4)


def test_wall_blocks_buttons(buttons_grid):
    # the wall sits between x=3 and x=4 over the full height
    for y in range(5):
        assert buttons_grid.neighbor(3, y, Move.EAST) == (3, y)
        assert buttons_grid.neighbor(4, y, Move.WEST) == (4, y)


def test_boundary_blocks(open_grid):
    assert open_grid.neighbor(0, 0, Move.NORTH) == (0, 0)
    assert open_grid.neighbor(0, 0, Move.WEST) == (0, 0)
    assert open_grid.neighbor(4, 4, Move.SOUTH) == (4, 4)
    assert open_grid.neighbor(2, 2, Move.NORTH) == (2, 1)


def test_absorbed_agent_does_not_move_or_draw(buttons_grid):
    rng = np.random.default_rng(0)
    s = AgentState(3, 0, True)
    before = rng.bit_generator.state
    for a in Move:
        assert env_step(buttons_grid, s, int(a), rng) == s
    assert rng.bit_generator.state == before


def test_entering_goal_absorbs(buttons_grid):
    g = GridSpec(2, 1, (frozenset(), frozenset({"g1"})), slip=1.0, starts=((0, 0),))
    n = env_step(g, AgentState(0, 0, False), int(Move.EAST), np.random.default_rng(0))
    assert n == AgentState(1, 0, True)


def test_slip_distribution_sums_to_one():
    for a in Move:
        dist = slip_distribution(0.8, int(a))
        assert dist[0][0] == a
        assert abs(sum(p for _, p in dist) - 1.0) < 1e-12
        assert len(dist) == (5 if a == Move.STAY else 4)


def test_slip_frequencies(open_grid):
    """10^5 draws from the centre: commanded direction 0.8 +- 0.01, the
    other three directions uniform (chi-square at 0.01)."""
    rng = np.random.default_rng(12345)
    s = AgentState(2, 2, False)
    n = 100_000
    counts = {m: 0 for m in Move}
    for _ in range(n):
        counts[_outcome(s, env_step(open_grid, s, int(Move.NORTH), rng))] += 1
    assert counts[Move.STAY] == 0
    assert abs(counts[Move.NORTH] / n - 0.8) <= 0.01
    obs = [counts[Move.NORTH], counts[Move.SOUTH], counts[Move.EAST], counts[Move.WEST]]
    exp = [0.8 * n] + [n * 0.2 / 3] * 3
    assert chisquare(obs, exp).pvalue > 0.01


def test_stay_slips_to_four_neighbours(open_grid):
    rng = np.random.default_rng(7)
    s = AgentState(2, 2, False)
    n = 20_000
    counts = {m: 0 for m in Move}
    for _ in range(n):
        counts[_outcome(s, env_step(open_grid, s, int(Move.STAY), rng))] += 1
    obs = [counts[m] for m in Move]
    exp = [n * 0.05] * 4 + [n * 0.8]
    assert chisquare(obs, exp).pvalue > 0.01


def test_non_environment_action_rejected(open_grid):
    with pytest.raises(GridError):
        env_step(open_grid, AgentState(0, 0, False), 5, np.random.default_rng(0))


@pytest.mark.parametrize("name", GRID_FIXTURES)
def test_grid_golden_round_trip(name):
    g = read_grid(DATA / name)
    text = serialize_grid(g)
    assert text == (GOLDEN / name).read_text()
    assert parse_grid(text) == g


@pytest.mark.parametrize("text, msg", [
    ("layout:\n    . .\nlegend:\n    . =\nstarts:\n    0 0\n", "slip"),
    ("slip: 0.8\nlayout:\n    . .\n    .\nlegend:\n    . =\nstarts:\n    0 0\n", "expected 2"),
    ("slip: 0.8\nlayout:\n    . x\nlegend:\n    . =\nstarts:\n    0 0\n", "x"),
    ("slip: 0.8\nlayout:\n    . .\nlegend:\n    . =\nstarts:\n    5 0\n", "bounds"),
    ("slip: 1.5\nlayout:\n    . .\nlegend:\n    . =\nstarts:\n    0 0\n", "slip"),
    ("slip: 0.8\nlayout:\n    . .\nlegend:\n    . =\nwalls:\n    v 9 0 1\nstarts:\n    0 0\n", "wall"),
])
def test_bad_grids(text, msg):
    with pytest.raises(GridError, match=msg):
        parse_grid(text)


def test_diameter(open_grid, buttons_grid):
    assert open_grid.diameter() == 8
    assert buttons_grid.diameter() >= 6


@st.composite
def walled_grids(draw):
    w, h = draw(st.integers(1, 5)), draw(st.integers(1, 5))
    walls = []
    for _ in range(draw(st.integers(0, 4))):
        orient = draw(st.sampled_from(["v", "h"]))
        lim_pos, lim_span = (w, h) if orient == "v" else (h, w)
        if lim_pos < 2:
            continue
        pos = draw(st.integers(1, lim_pos - 1))
        start = draw(st.integers(0, lim_span - 1))
        end = draw(st.integers(start + 1, lim_span))
        walls.append(WallSegment(orient, pos, start, end))
    labels = tuple(draw(st.sampled_from([frozenset(), frozenset({"a"}), frozenset({"b", "c"}),
                                         frozenset({"g1"})])) for _ in range(w * h))
    return GridSpec(w, h, labels, tuple(walls), ((0, 0),), draw(st.sampled_from([0.8, 1.0, 0.5])))


def _crosses(wall: WallSegment, a, b) -> bool:
    (x0, y0), (x1, y1) = a, b
    if wall.orient == "v":
        return y0 == y1 and min(x0, x1) + 1 == wall.pos and max(x0, x1) == wall.pos \
            and wall.start <= y0 < wall.end
    return x0 == x1 and min(y0, y1) + 1 == wall.pos and max(y0, y1) == wall.pos \
        and wall.start <= x0 < wall.end


@settings(max_examples=200, deadline=None)
@given(walled_grids())
def test_fuzz_walls(g):
    for y in range(g.height):
        for x in range(g.width):
            for d in Move:
                n = g.neighbor(x, y, d)
                assert g.in_bounds(*n)
                assert abs(n[0] - x) + abs(n[1] - y) <= 1
                if n != (x, y):
                    assert not any(_crosses(w, (x, y), n) for w in g.walls)
                elif d != Move.STAY:
                    target = (x + {2: 1, 3: -1}.get(int(d), 0), y + {0: -1, 1: 1}.get(int(d), 0))
                    assert not g.in_bounds(*target) or any(_crosses(w, (x, y), target)
                                                          for w in g.walls)
    assert parse_grid(serialize_grid(g)) == g
