"""Time the simulator kernels: numba vs the pure-numpy fallback, fast vs ticket-loop.

    python benchmarks/bench_simulator.py [--wins 277] [--replicates 60000]

The default workload is the largest player in the published data (277
recorded wins) on a table with the Pick 4 recorded-prize odds (1 in 10,000)
plus several small-prize tiers. The ticket loop is timed on a reduced
workload because it costs ~10,000 uniforms per win.
"""

import argparse
import time
import warnings

import numpy as np

warnings.filterwarnings("ignore", message=".*TBB.*")

from lottoscan.ingest import ClaimRecord, PlayerProfile  # noqa: E402
from lottoscan.montecarlo import SeedSpec, simulate_player  # noqa: E402
from lottoscan.prizes import PrizeTable  # noqa: E402

TABLE = PrizeTable("pick4-class", 100, ((100, 0.1), (200, 0.05), (500, 0.02), (2000, 0.005),
                                        (10000, 0.001), (500000, 1e-4)))


def player(wins: int) -> PlayerProfile:
    rec = ClaimRecord("bench", "", "", "online", 500000, TABLE.game_name, "", None, "store", "addr")
    return PlayerProfile.from_wins("bench", [rec] * wins)


def timed(prof, engine, method, reps, repeat):
    simulate_player(prof, lambda w: TABLE, seeds=SeedSpec(1), replicates=10, engine=engine, method=method)
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = simulate_player(prof, lambda w: TABLE, seeds=SeedSpec(1), replicates=reps,
                              engine=engine, method=method)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wins", type=int, default=277)
    ap.add_argument("--replicates", type=int, default=60_000)
    ap.add_argument("--loop-wins", type=int, default=5)
    ap.add_argument("--loop-replicates", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=1)
    args = ap.parse_args()

    rows = []
    results = {}
    for method, wins, reps in (("fast", args.wins, args.replicates),
                               ("loop", args.loop_wins, args.loop_replicates)):
        prof = player(wins)
        for engine in ("numba", "numpy"):
            secs, out = timed(prof, engine, method, reps, args.repeat)
            results[(method, engine)] = out
            rows.append((method, engine, wins, reps, secs, wins * reps / secs))
        same = np.array_equal(results[(method, "numba")], results[(method, "numpy")])
        rows.append((method, "identical", wins, reps, float("nan"), float(same)))

    print(f"{'method':<6} {'engine':<9} {'wins':>5} {'reps':>7} {'seconds':>9} {'win-sims/s':>12}")
    for method, engine, wins, reps, secs, rate in rows:
        if engine == "identical":
            print(f"{method:<6} {'outputs identical across engines: ' + str(bool(rate))}")
        else:
            print(f"{method:<6} {engine:<9} {wins:>5} {reps:>7} {secs:>9.2f} {rate:>12.3g}")


if __name__ == "__main__":
    main()
