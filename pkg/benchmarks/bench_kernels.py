"""Time the training kernels compiled with numba against the plain Python
fallback (LTLSHAPE_DISABLE_NUMBA=1), and check both give the same returns.

    python3 benchmarks/bench_kernels.py [--episodes 500] [--bench flags]
"""
import argparse
import json
import os
import subprocess
import sys
import time

CHILD = """
import json, sys, time
import numpy as np
from ltlshape import backend
from ltlshape.bench import BENCHMARKS
from ltlshape.bench.runner import TrainingParams, train

name, mode, episodes = sys.argv[1], sys.argv[2], int(sys.argv[3])
b = BENCHMARKS[name]
grid, ldba = b.load_grid(), b.load_automaton()
p = TrainingParams(episodes=episodes)
t0 = time.perf_counter()
train(grid, mode, 0, TrainingParams(episodes=1), ldba=ldba, rule=b.baseline)
warm = time.perf_counter() - t0
t0 = time.perf_counter()
r = train(grid, mode, 0, p, ldba=ldba, rule=b.baseline)
dt = time.perf_counter() - t0
print(json.dumps({"backend": backend(), "warmup": warm, "seconds": dt,
                  "checksum": float(r.returns.sum()), "q": float(r.q.sum())}))
"""


def run(name, mode, episodes, disable):
    env = dict(os.environ)
    env.pop("LTLSHAPE_DISABLE_NUMBA", None)
    if disable:
        env["LTLSHAPE_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", CHILD, name, mode, str(episodes)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=500)
    ap.add_argument("--bench", nargs="*", default=["buttons", "flags", "rendezvous"])
    args = ap.parse_args()
    print(f"{'benchmark':<12}{'mode':<10}{'numba s':>10}{'python s':>10}{'speedup':>9}  same")
    for name in args.bench:
        for mode in ("shaped", "baseline"):
            fast = run(name, mode, args.episodes, disable=False)
            slow = run(name, mode, args.episodes, disable=True)
            same = (fast["checksum"], fast["q"]) == (slow["checksum"], slow["q"])
            print(f"{name:<12}{mode:<10}{fast['seconds']:>10.3f}{slow['seconds']:>10.3f}"
                  f"{slow['seconds'] / fast['seconds']:>8.0f}x  {same}"
                  + ("" if fast["backend"] == "numba" else "  (numba unavailable)"))
    print(f"{args.episodes} episodes each; numba times exclude compilation")


if __name__ == "__main__":
    main()
