import numpy as np
import pytest

from ltlshape.automaton import load, load_file
from ltlshape.gridworld import GridSpec, parse_grid, read_grid
from ltlshape.hoa import parse_hoa
from ltlshape.oracle import (ProductError, StateCapExceeded, build_product, check_distributions,
                             check_equivalence, product_step, simulate_product)

from conftest import DATA

THREE_STATE = """HOA: v1
States: 3
Start: 0
AP: 2 "a" "b"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[0] 1
[!0] 0
State: 1
[1] 2 {0}
[!1] 1
State: 2
[t] 2 {0}
--END--
"""

ALWAYS = THREE_STATE.replace("States: 3", "States: 1").split("--BODY--")[0] + \
    "--BODY--\nState: 0\n[t] 0 {0}\n--END--\n"

EPS1, EPS2 = 5, 6  # the two guesses of the choice automaton


@pytest.fixture(scope="module")
def two_cell_mdp(choice, two_cell):
    return build_product(choice, (two_cell,))


def test_two_cell_state_count(two_cell_mdp):
    assert two_cell_mdp.n_states == 8


def test_two_cell_accepting_states(two_cell_mdp):
    acc = {two_cell_mdp.decode(s) for s in two_cell_mdp.accepting_states()}
    assert acc == {((0,), 1), ((0,), 2), ((1,), 1), ((1,), 2)}
    assert {two_cell_mdp.decode(s) for s in two_cell_mdp.trap_states()} == {((0,), 3), ((1,), 3)}


def test_two_cell_initial_actions(two_cell_mdp):
    acts = two_cell_mdp.actions[two_cell_mdp.initial]
    assert (EPS1,) in acts and (EPS2,) in acts
    assert len(acts) == 5 + 2


def test_two_cell_eps2_from_s0_hits_sink(two_cell_mdp):
    trace = simulate_product(two_cell_mdp, [(EPS2,)], np.random.default_rng(0))
    cells, q = two_cell_mdp.decode(trace[-1].state)
    assert cells == (0,) and q == 3
    assert trace[-1].trapped and not trace[-1].accepting


def test_two_cell_eps2_from_s1_is_accepting(choice, two_cell):
    g = GridSpec(two_cell.width, two_cell.height, two_cell.cell_labels, starts=((1, 0),),
                 slip=two_cell.slip)
    m = build_product(choice, (g,))
    trace = simulate_product(m, [(EPS2,), (4,)], np.random.default_rng(0))
    assert m.decode(trace[1].state) == ((1,), 2)
    assert trace[1].accepting and trace[1].reward == pytest.approx(0.01)
    # staying on b keeps the run inside the accepting component (with a slip
    # back to s0 it would leave it)
    assert all(m.decode(s.state)[1] in (2, 3) for s in trace[1:])


def test_cardinality_243():
    ldba = load(parse_hoa(THREE_STATE))
    g = parse_grid("slip: 0.8\nlayout:\n    a . .\n    . . .\n    . . b\nlegend:\n    . =\n"
                   "    a = a\n    b = b\nstarts:\n    0 0\n    2 2\n")
    m = build_product(ldba, (g, g))
    assert ldba.n_states == 3
    assert m.n_states == 9 * 9 * 3 == 243
    check_distributions(m)


def test_empty_trace(two_cell_mdp):
    trace = simulate_product(two_cell_mdp, [], np.random.default_rng(0))
    assert len(trace) == 1 and trace[0].state == two_cell_mdp.initial


def test_illegal_action(two_cell_mdp):
    with pytest.raises(ProductError):
        product_step(two_cell_mdp, two_cell_mdp.initial, (9,), np.random.default_rng(0))


def test_step_after_trap(two_cell_mdp):
    with pytest.raises(ProductError):
        simulate_product(two_cell_mdp, [(EPS2,), (4,)], np.random.default_rng(0))


def test_state_cap():
    ldba = load_file(DATA / "flags.hoa")
    g = read_grid(DATA / "flags.grid")
    with pytest.raises(StateCapExceeded, match="cap"):
        build_product(ldba, (g, g), state_cap=1000)


@pytest.mark.parametrize("hoa, grid", [("rendezvous.hoa", "tiny_rendezvous.grid"),
                                       ("choice.hoa", "tiny_choice.grid")])
def test_distributions_sum_to_one(hoa, grid):
    g = read_grid(DATA / grid)
    check_distributions(build_product(load_file(DATA / hoa), (g, g)))


def test_trivial_all_accepting():
    ldba = load(parse_hoa(ALWAYS))
    g = parse_grid("slip: 0.8\nlayout:\n    . .\n    . .\nlegend:\n    . =\nstarts:\n    0 0\n")
    m = build_product(ldba, (g,))
    rng = np.random.default_rng(0)
    acts = [(int(a),) for a in rng.integers(0, 5, size=50)]
    trace = simulate_product(m, acts, rng)
    assert all(s.reward == pytest.approx(0.01) and s.discount == 0.99 for s in trace[1:])
    rep = check_equivalence(ldba, (g,), 2000, seed=3)
    assert rep.ok, rep.format()


@pytest.mark.parametrize("hoa, grid", [("rendezvous.hoa", "tiny_rendezvous.grid"),
                                       ("motivating_phi3.hoa", "tiny_buttons.grid"),
                                       ("choice.hoa", "tiny_choice.grid"),
                                       ("flags.hoa", "tiny_flags.grid")])
def test_equivalence_one_seed(hoa, grid):
    g = read_grid(DATA / grid)
    rep = check_equivalence(load_file(DATA / hoa), (g, g), 3000, seed=0)
    assert rep.ok, rep.format()


@pytest.mark.parametrize("hoa, grid", [("motivating_phi3.hoa", "tiny_buttons.grid"),
                                       ("choice.hoa", "tiny_choice.grid")])
def test_mutant_detected(hoa, grid):
    g = read_grid(DATA / grid)
    rep = check_equivalence(load_file(DATA / hoa), (g, g), 10_000, seed=0, epsilon_first=False)
    assert not rep.ok
    d = rep.divergence
    assert any(a >= 5 for a in d.shaping[-1])  # first mismatch is at an epsilon step
    assert "divergence at step" in rep.format()


def test_mutant_invisible_without_epsilons():
    g = read_grid(DATA / "tiny_rendezvous.grid")
    rep = check_equivalence(load_file(DATA / "rendezvous.hoa"), (g, g), 2000, seed=0,
                            epsilon_first=False)
    assert rep.ok
