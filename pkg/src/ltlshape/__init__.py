"""Semi-centralized reward shaping for multi-agent tabular Q-learning with
LDBA objectives, plus a product-MDP oracle and grid benchmarks."""
from ._jit import HAS_NUMBA, backend
from .automaton import DeterminismError, Ldba, LdbaError, load, load_file
from .gridworld import GridError, GridSpec, Move, parse_grid, read_grid
from .hoa import HoaDocument, HoaError, parse_hoa, read_hoa, serialize_hoa
from .shaping import ShapingConfig, joint_step, reset

__version__ = "0.1.0"

__all__ = [
    "HAS_NUMBA", "backend", "DeterminismError", "Ldba", "LdbaError", "load", "load_file",
    "GridError", "GridSpec", "Move", "parse_grid", "read_grid", "HoaDocument", "HoaError",
    "parse_hoa", "read_hoa", "serialize_hoa", "ShapingConfig", "joint_step", "reset",
]
