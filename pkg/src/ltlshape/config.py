"""INI experiment configuration.

Grammar (``configparser`` syntax, ``#`` and ``;`` comments)::

    [experiment]
    benchmark = flags            # a shipped benchmark, or give grid/automaton
    grid = my.grid               # overrides the benchmark's grid
    automaton = my.hoa           # overrides the benchmark's automaton
    modes = shaped, baseline     # any of shaped, baseline
    seeds = 0-4                  # comma list, ranges allowed (0-4, 7, 9)
    episodes = 150000
    episode_length = 100
    window = 1000                # rolling window for smoothing
    workers = 1                  # process pool size over seeds
    out = results                # output directory for CSV files
    qtables = false              # also dump every final Q-table as text

    [baseline]
    rule = flags                 # buttons, flags or rendezvous
    sync_reward = 2
    goal_reward = 10

    [shaping]
    gamma = 0.999
    gamma_b = 0.99
    trap_reward = -1
    epsilon_first = true         # false only for mutation testing

    [schedule]
    kind = linear                # or exponential
    explore_start = 1.0
    explore_end = 0.01
    alpha_start = 1.0
    alpha_end = 0.001
    decay_episodes =             # empty: decay over all episodes

    [oracle]
    instances = tiny_rendezvous, tiny_buttons
    seeds = 0-19
    steps = 10000
    episode_length = 100
    state_cap = 1000000

    [instance tiny_rendezvous]
    grid = tiny_rendezvous.grid
    automaton = rendezvous.hoa

Relative paths resolve against the config file's directory, then the
working directory, then the shipped data directory. Every section is
optional; missing keys take the defaults shown.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .automaton import Ldba, LdbaError, load_file
from .bench.benchmarks import BENCHMARKS, BaselineRewardRule, Benchmark
from .bench.runner import MODES, TrainingParams
from .gridworld import GridError, GridSpec, read_grid
from .hoa import HoaError
from .paths import resolve
from .shaping import ShapingConfig, ShapingError, check_alphabet


class ConfigError(ValueError):
    """Invalid configuration (exit code 1)."""


class ConfigIOError(OSError):
    """A referenced file is missing or unreadable (exit code 2)."""


@dataclass(frozen=True)
class OracleInstance:
    name: str
    grid: GridSpec
    ldba: Ldba


@dataclass(frozen=True)
class OracleConfig:
    instances: tuple[OracleInstance, ...] = ()
    seeds: tuple[int, ...] = tuple(range(20))
    steps: int = 10_000
    episode_length: int = 100
    state_cap: int = 10**6


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: Benchmark
    grid: GridSpec
    ldba: Optional[Ldba]
    modes: tuple[str, ...]
    seeds: tuple[int, ...]
    params: TrainingParams
    out: Path
    window: int = 1000
    workers: int = 1
    qtables: bool = False
    epsilon_first: bool = True
    oracle: OracleConfig = field(default_factory=OracleConfig)
    source: Optional[Path] = None

    def with_overrides(self, seeds=None, out=None, modes=None) -> "ExperimentConfig":
        cfg = self
        if seeds is not None:
            cfg = replace(cfg, seeds=_check_seeds(tuple(seeds)))
        if out is not None:
            cfg = replace(cfg, out=Path(out))
        if modes is not None:
            cfg = replace(cfg, modes=_check_modes(tuple(modes)))
        return cfg


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0-2, 7"`` -> ``(0, 1, 2, 7)``. Duplicates are dropped, order kept."""
    seeds: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                rng = range(int(lo), int(hi) + 1)
                if not rng:
                    raise ConfigError(f"empty seed range {part!r}")
                seeds.extend(rng)
            else:
                seeds.append(int(part))
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"bad seed list entry {part!r} (seeds are non-negative)") from None
    return _check_seeds(tuple(dict.fromkeys(seeds)))


def _check_seeds(seeds: tuple[int, ...]) -> tuple[int, ...]:
    if not seeds:
        raise ConfigError("seed list is empty")
    return seeds


def _check_modes(modes: tuple[str, ...]) -> tuple[str, ...]:
    if not modes:
        raise ConfigError("no modes given")
    for m in modes:
        if m not in MODES:
            raise ConfigError(f"unknown mode {m!r}; expected one of {', '.join(MODES)}")
    return tuple(dict.fromkeys(modes))


def parse_modes(text: str) -> tuple[str, ...]:
    if text.strip() == "both":
        return MODES
    return _check_modes(tuple(m.strip() for m in text.split(",") if m.strip()))


def _get(sec, key, conv, default):
    if sec is None or key not in sec or sec[key].strip() == "":
        return default
    raw = sec[key].strip()
    try:
        if conv is bool:
            return sec.getboolean(key)
        return conv(raw)
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key}: cannot read {raw!r} as {conv.__name__}") from None


def _load_grid(name: str, base: Path) -> GridSpec:
    path = resolve(name, base)
    try:
        return read_grid(path)
    except FileNotFoundError:
        raise ConfigIOError(f"grid file not found: {path}") from None
    except OSError as e:
        raise ConfigIOError(f"cannot read grid file {path}: {e}") from None
    except GridError as e:
        raise ConfigError(f"{path}: {e}") from None


def _load_ldba(name: str, base: Path) -> Ldba:
    path = resolve(name, base)
    try:
        return load_file(path)
    except FileNotFoundError:
        raise ConfigIOError(f"automaton file not found: {path}") from None
    except OSError as e:
        raise ConfigIOError(f"cannot read automaton file {path}: {e}") from None
    except (HoaError, LdbaError) as e:
        raise ConfigError(f"{path}: {e}") from None


def _check_pair(grid: GridSpec, ldba: Ldba, n_agents: int, params: TrainingParams, what: str):
    try:
        check_alphabet(ShapingConfig(ldba, (grid,) * n_agents, params.gamma, params.gamma_b,
                                     params.trap_reward))
    except ShapingError as e:
        raise ConfigError(f"{what}: {e}") from None


def read_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigIOError(f"config file not found: {p}") from None
    except OSError as e:
        raise ConfigIOError(f"cannot read config file {p}: {e}") from None
    return parse_config(text, base=p.parent, source=p)


_KEYS = {
    "experiment": {"benchmark", "grid", "automaton", "modes", "seeds", "episodes",
                   "episode_length", "window", "workers", "out", "qtables"},
    "baseline": {"rule", "sync_reward", "goal_reward"},
    "shaping": {"gamma", "gamma_b", "trap_reward", "epsilon_first"},
    "schedule": {"kind", "explore_start", "explore_end", "alpha_start", "alpha_end",
                 "decay_episodes"},
    "oracle": {"instances", "seeds", "steps", "episode_length", "state_cap"},
    "instance": {"grid", "automaton", "agents"},
}


def parse_config(text: str, base: Optional[Path] = None, source: Optional[Path] = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=str(source or "<config>"))
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    for s in cp.sections():
        keys = _KEYS.get("instance" if s.startswith("instance ") else s)
        if keys is None:
            raise ConfigError(f"unknown section [{s}]")
        extra = sorted(set(cp[s]) - keys)
        if extra:
            raise ConfigError(f"[{s}]: unknown key {extra[0]!r}")
    base = base or Path.cwd()
    ex = cp["experiment"] if cp.has_section("experiment") else None
    sh = cp["shaping"] if cp.has_section("shaping") else None
    sc = cp["schedule"] if cp.has_section("schedule") else None
    bl = cp["baseline"] if cp.has_section("baseline") else None

    # invariants first, before anything is loaded or trained
    gamma = _get(sh, "gamma", float, 0.999)
    gamma_b = _get(sh, "gamma_b", float, 0.99)
    if not 0.0 < gamma_b <= gamma < 1.0:
        raise ConfigError(f"need 0 < gamma_b <= gamma < 1, got gamma={gamma}, gamma_b={gamma_b}")
    seeds = parse_seeds(_get(ex, "seeds", str, "0"))
    modes = parse_modes(_get(ex, "modes", str, "shaped"))

    bench_name = _get(ex, "benchmark", str, None)
    if bench_name is not None:
        if bench_name not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {bench_name!r}; shipped: {', '.join(BENCHMARKS)}")
        bench = BENCHMARKS[bench_name]
    else:
        grid_name = _get(ex, "grid", str, None)
        if grid_name is None:
            raise ConfigError("[experiment] needs either benchmark or grid")
        bench = Benchmark(Path(grid_name).stem, grid_name, _get(ex, "automaton", str, ""),
                          BaselineRewardRule("buttons"))

    try:
        rule = BaselineRewardRule(_get(bl, "rule", str, bench.baseline.rule),
                                  _get(bl, "sync_reward", float, bench.baseline.sync_reward),
                                  _get(bl, "goal_reward", float, bench.baseline.goal_reward))
        params = TrainingParams(
            episodes=_get(ex, "episodes", int, bench.episodes),
            episode_length=_get(ex, "episode_length", int, bench.episode_length),
            gamma=gamma, gamma_b=gamma_b,
            trap_reward=_get(sh, "trap_reward", float, -1.0),
            explore_start=_get(sc, "explore_start", float, 1.0),
            explore_end=_get(sc, "explore_end", float, 0.01),
            alpha_start=_get(sc, "alpha_start", float, 1.0),
            alpha_end=_get(sc, "alpha_end", float, 0.001),
            schedule_kind=_get(sc, "kind", str, "linear"),
            decay_episodes=_get(sc, "decay_episodes", int, None))
        params.explore_schedule()
        params.alpha_schedule()
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    bench = replace(bench, grid=_get(ex, "grid", str, bench.grid),
                    automaton=_get(ex, "automaton", str, bench.automaton), baseline=rule,
                    episodes=params.episodes, episode_length=params.episode_length)

    grid = _load_grid(bench.grid, base)
    if params.episode_length < grid.diameter():
        raise ConfigError(f"episode_length {params.episode_length} is below the grid diameter "
                          f"{grid.diameter()}")
    ldba = None
    if "shaped" in modes:
        if not bench.automaton:
            raise ConfigError("shaped mode needs [experiment] automaton")
        ldba = _load_ldba(bench.automaton, base)
        _check_pair(grid, ldba, bench.n_agents, params, bench.grid)
    if len(grid.starts) < bench.n_agents:
        raise ConfigError(f"{bench.grid} declares {len(grid.starts)} starts for "
                          f"{bench.n_agents} agents")

    window = _get(ex, "window", int, 1000)
    workers = _get(ex, "workers", int, 1)
    if window < 1 or workers < 1:
        raise ConfigError("window and workers must be positive")
    return ExperimentConfig(
        benchmark=bench, grid=grid, ldba=ldba, modes=modes, seeds=seeds, params=params,
        out=Path(_get(ex, "out", str, "results")), window=window, workers=workers,
        qtables=_get(ex, "qtables", bool, False),
        epsilon_first=_get(sh, "epsilon_first", bool, True),
        oracle=_parse_oracle(cp, base, params), source=source)


def _parse_oracle(cp, base: Path, params: TrainingParams) -> OracleConfig:
    if not cp.has_section("oracle"):
        return OracleConfig()
    sec = cp["oracle"]
    names = [n.strip() for n in _get(sec, "instances", str, "").split(",") if n.strip()]
    instances = []
    for name in names:
        key = f"instance {name}"
        if not cp.has_section(key):
            raise ConfigError(f"oracle instance {name!r} has no [{key}] section")
        isec = cp[key]
        g = _get(isec, "grid", str, None)
        a = _get(isec, "automaton", str, None)
        if g is None or a is None:
            raise ConfigError(f"[{key}] needs grid and automaton")
        grid, ldba = _load_grid(g, base), _load_ldba(a, base)
        n = _get(isec, "agents", int, 2)
        _check_pair(grid, ldba, n, params, key)
        instances.append(OracleInstance(name, grid, ldba))
    cfg = OracleConfig(tuple(instances), parse_seeds(_get(sec, "seeds", str, "0-19")),
                       _get(sec, "steps", int, 10_000), _get(sec, "episode_length", int, 100),
                       _get(sec, "state_cap", int, 10**6))
    if cfg.steps < 0 or cfg.episode_length < 1 or cfg.state_cap < 1:
        raise ConfigError("[oracle] steps >= 0, episode_length >= 1 and state_cap >= 1 required")
    return cfg
