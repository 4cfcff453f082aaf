import sys
from pathlib import Path

import pytest

from ltlshape.automaton import load_file
from ltlshape.gridworld import parse_grid, read_grid
from ltlshape.paths import data_dir

DATA = Path(str(data_dir()))
HOA_FIXTURES = ["motivating_phi3.hoa", "motivating_phi3prime.hoa", "flags.hoa",
                "rendezvous.hoa", "choice.hoa"]
GRID_FIXTURES = sorted(p.name for p in DATA.glob("*.grid"))


@pytest.fixture(scope="session")
def data():
    return DATA


@pytest.fixture(scope="session")
def phi3():
    return load_file(DATA / "motivating_phi3.hoa")


@pytest.fixture(scope="session")
def phi3prime():
    return load_file(DATA / "motivating_phi3prime.hoa")


@pytest.fixture(scope="session")
def choice():
    return load_file(DATA / "choice.hoa")


@pytest.fixture(scope="session")
def flags_ldba():
    return load_file(DATA / "flags.hoa")


@pytest.fixture(scope="session")
def rendezvous_ldba():
    return load_file(DATA / "rendezvous.hoa")


@pytest.fixture(scope="session")
def buttons_grid():
    return read_grid(DATA / "buttons.grid")


@pytest.fixture(scope="session")
def two_cell():
    """Two cells side by side, a on the left and b on the right."""
    return parse_grid("""
slip: 0.9
layout:
    a b
legend:
    a = a
    b = b
starts:
    0 0
""", name="two_cell")


@pytest.fixture(scope="session")
def open_grid():
    return parse_grid("""
slip: 0.8
layout:
    . . . . .
    . . . . .
    . . . . .
    . . . . .
    . . . . .
legend:
    . =
starts:
    2 2
    0 0
""", name="open")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
