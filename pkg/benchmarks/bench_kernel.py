"""Benchmark the compiled tick kernel against the pure-Python fallback.

Both lanes execute the same draws and produce identical societies; this
script measures how much the compiled lane buys us, and verifies the
digests agree while it is at it.

Usage:
    python benchmarks/bench_kernel.py [--agents 1000] [--ticks 500] [--repeat 3]
"""

import argparse
import statistics
import time

from socsynth.config import GraphConfig, SimulationConfig
from socsynth.fixtures import region_meridia
from socsynth.kernel import HAVE_COMPILED
from socsynth.scheduler import run


def time_lane(lane: str, cfg, region, repeat: int):
    digests = set()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        log = run(cfg, region, lane=lane)
        times.append(time.perf_counter() - start)
        digests.add(log.final_digest)
    assert len(digests) == 1, f"{lane} lane is not deterministic"
    return min(times), statistics.mean(times), digests.pop()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--agents", type=int, default=1000)
    parser.add_argument("--ticks", type=int, default=500)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cfg = SimulationConfig(
        graph=GraphConfig(n_agents=args.agents),
        n_ticks=args.ticks,
        seed=42,
    )
    region = region_meridia()
    interactions = args.agents * args.ticks

    print(f"n_agents={args.agents} n_ticks={args.ticks} ({interactions:,} interactions/run)")

    py_best, py_mean, py_digest = time_lane("python", cfg, region, args.repeat)
    print(f"python lane:   best {py_best:8.3f}s  mean {py_mean:8.3f}s  "
          f"({interactions / py_best:,.0f} interactions/s)")

    if not HAVE_COMPILED:
        print("compiled lane: unavailable (install built the pure-Python fallback only)")
        return

    c_best, c_mean, c_digest = time_lane("compiled", cfg, region, args.repeat)
    print(f"compiled lane: best {c_best:8.3f}s  mean {c_mean:8.3f}s  "
          f"({interactions / c_best:,.0f} interactions/s)")
    print(f"speedup: {py_best / c_best:.1f}x")
    print(f"digests identical: {py_digest == c_digest}")


if __name__ == "__main__":
    main()
