"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 IO error, 3 divergence (oracle
mismatch, or non-finite Q-values after training).
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._jit import backend
from .automaton import LdbaError, load_file
from .config import ConfigError, ConfigIOError, parse_modes, parse_seeds, read_config
from .gridworld import GridError, read_grid
from .hoa import HoaError
from .shaping import ShapingConfig, ShapingError, check_alphabet

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_DIVERGENCE = 0, 1, 2, 3

log = logging.getLogger("ltlshape")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load_config(args):
    cfg = read_config(args.config)
    seeds = parse_seeds(args.seeds) if getattr(args, "seeds", None) else None
    modes = parse_modes(args.mode) if getattr(args, "mode", None) else None
    return cfg.with_overrides(seeds=seeds, out=getattr(args, "out", None), modes=modes)


def cmd_run(args) -> int:
    from .bench.runner import run_experiment, write_csv
    from .metrics import final_mean, final_quartile_std, final_raw_mean

    cfg = _load_config(args)
    bench = cfg.benchmark
    status = EXIT_OK
    for mode in cfg.modes:
        t0 = time.perf_counter()
        res = run_experiment(bench, mode, cfg.seeds, cfg.params, grid=cfg.grid,
                             ldba=cfg.ldba, workers=cfg.workers, window=cfg.window)
        path = cfg.out / f"{bench.name}_{mode}.csv"
        try:
            write_csv(path, res.curves)
            if cfg.qtables:
                for run in res.runs:
                    for i in range(run.q.shape[0]):
                        qpath = cfg.out / f"{bench.name}_{mode}_seed{run.seed}_agent{i}.qtable"
                        with open(qpath, "w", encoding="utf-8") as f:
                            run.qtable(i).dump(f)
        except OSError as e:
            _err(f"cannot write results under {cfg.out}: {e}")
            return EXIT_IO
        if any(not np.isfinite(run.q).all() for run in res.runs):
            _err(f"{bench.name} {mode}: non-finite Q-values")
            status = EXIT_DIVERGENCE
        if cfg.params.episodes == 0:
            print(f"{bench.name} {mode}: 0 episodes, {len(cfg.seeds)} seeds -> {path}")
            continue
        print(f"{bench.name} {mode}: final smoothed normalized {final_mean(res.curves):.4f}, "
              f"final raw {final_raw_mean(res.curves, cfg.window):.4f}, "
              f"final-quartile std {final_quartile_std(res.curves):.4f}, "
              f"{len(cfg.seeds)} seeds, {time.perf_counter() - t0:.1f}s [{backend()}] -> {path}")
    return status


def cmd_validate(args) -> int:
    if args.config:
        cfg = read_config(args.config)
        print(f"{args.config}: ok ({cfg.benchmark.name}, modes {', '.join(cfg.modes)}, "
              f"{len(cfg.seeds)} seeds, {len(cfg.oracle.instances)} oracle instances)")
        if not args.automaton:
            return EXIT_OK
    if not args.automaton:
        _err("validate needs an automaton file or --config")
        return EXIT_VALIDATION
    ldba = load_file(args.automaton)
    n_acc = ldba.n_accepting_edges()
    print(f"{ldba.n_states} states, {n_acc} accepting transition{'' if n_acc == 1 else 's'}")
    print(f"alphabet: {', '.join(ldba.aps) if ldba.aps else '(empty)'}")
    print(f"initial state: {ldba.initial}")
    trap = "none" if ldba.trap is None else str(ldba.trap)
    print(f"trap state: {trap}")
    for q in range(ldba.n_states):
        moves = ldba.epsilons[q]
        if moves:
            desc = ", ".join(f"eps{m.action} -> {m.target}" for m in moves)
            print(f"  state {q}: {desc}")
    print(f"epsilon moves: {sum(len(m) for m in ldba.epsilons)}")
    if args.grid:
        grid = read_grid(args.grid)
        n = max(1, len(grid.starts))
        check_alphabet(ShapingConfig(ldba, (grid,) * n))
        print(f"grid {args.grid}: {grid.width}x{grid.height}, labels "
              f"{', '.join(sorted(grid.alphabet)) or '(none)'} covered by the alphabet")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import StateCapExceeded, build_product, check_equivalence

    cfg = _load_config(args)
    oc = cfg.oracle
    if not oc.instances:
        _err(f"{args.config}: no [oracle] instances configured")
        return EXIT_VALIDATION
    seeds = cfg.seeds if args.seeds else oc.seeds
    p = cfg.params
    failed = 0
    t0 = time.perf_counter()
    for inst in oc.instances:
        grids = (inst.grid,) * cfg.benchmark.n_agents
        try:
            m = build_product(inst.ldba, grids, p.gamma, p.gamma_b, p.trap_reward, oc.state_cap)
        except StateCapExceeded as e:
            _err(f"{inst.name}: {e}")
            return EXIT_VALIDATION
        for seed in seeds:
            rep = check_equivalence(inst.ldba, grids, oc.steps, seed, oc.episode_length,
                                    p.gamma, p.gamma_b, p.trap_reward,
                                    epsilon_first=cfg.epsilon_first, product=m)
            if not rep.ok:
                failed += 1
                print(f"{inst.name}: {rep.format()}")
        print(f"{inst.name}: {m.n_states} product states, {len(seeds)} seeds x {oc.steps} steps")
    total = len(oc.instances) * len(seeds)
    print(f"oracle: {total - failed}/{total} runs equivalent in {time.perf_counter() - t0:.1f}s")
    return EXIT_DIVERGENCE if failed else EXIT_OK


def cmd_plot(args) -> int:
    try:
        from .bench.plot import plot_csvs
    except ImportError:
        _err("plotting needs matplotlib (pip install 'artifact[plot]')")
        return EXIT_IO
    csvs = list(args.csv)
    if args.config:
        # --out names the SVG here, not the results directory
        cfg = read_config(args.config)
        seeds = parse_seeds(args.seeds) if args.seeds else None
        modes = parse_modes(args.mode) if args.mode else None
        cfg = cfg.with_overrides(seeds=seeds, modes=modes)
        csvs += [cfg.out / f"{cfg.benchmark.name}_{m}.csv" for m in cfg.modes]
    if not csvs:
        _err("nothing to plot; pass CSV files or --config")
        return EXIT_VALIDATION
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        _err("plotting needs matplotlib (pip install 'artifact[plot]')")
        return EXIT_IO
    out = Path(args.out) if args.out else Path(csvs[0]).with_suffix(".svg")
    if out.is_dir() or (args.out and not out.suffix):
        out = out / (Path(csvs[0]).stem + ".svg")
    plot_csvs(csvs, out, title=args.title or "")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltlshape", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train and write learning-curve CSVs")
    r.add_argument("--config", required=True)
    r.add_argument("--seeds", help="override seeds, e.g. 0-4 or 1,3")
    r.add_argument("--out", help="override output directory")
    r.add_argument("--mode", help="shaped, baseline, both, or a comma list")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check an automaton (and grid) or a config file")
    v.add_argument("automaton", nargs="?")
    v.add_argument("--grid")
    v.add_argument("--config")
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="compare the shaping runtime with the explicit product MDP")
    o.add_argument("--config", required=True)
    o.add_argument("--seeds", help="override the [oracle] seeds")
    o.set_defaults(func=cmd_oracle)

    pl = sub.add_parser("plot", help="render CSVs as an SVG chart")
    pl.add_argument("csv", nargs="*")
    pl.add_argument("--config", help="plot the CSVs a run with this config wrote")
    pl.add_argument("--mode")
    pl.add_argument("--seeds")
    pl.add_argument("--out", help="SVG path or directory")
    pl.add_argument("--title")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigIOError, FileNotFoundError, PermissionError, IsADirectoryError) as e:
        _err(str(e))
        return EXIT_IO
    except (ConfigError, HoaError, LdbaError, GridError, ShapingError) as e:
        _err(str(e))
        return EXIT_VALIDATION
    except OSError as e:
        _err(str(e))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
