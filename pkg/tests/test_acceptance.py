"""The twelve numbered acceptance criteria, each reported as one PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""

import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from lottoscan.cluster import feature_vector, kmeans
from lottoscan.config import data_path
from lottoscan.constants import DEFAULT_CONSTANTS
from lottoscan.ingest import PlayerProfile, aggregate_players, parse_claims
from lottoscan.montecarlo import (SeedSpec, WinSimSpec, bonferroni_quantiles, screening_matched_table,
                                  simulate_player, simulate_win_ticket_loop, win_outcomes)
from lottoscan.prizes import PrizeTable
from lottoscan.screen import ecdf_at, entropy, entropy_ecdf, mean_net_gain_per_win, screen_players
from lottoscan.synth import load_manifest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import claim, profile_from_counts  # noqa: E402

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}
FIXTURES = Path(__file__).parent / "fixtures" / "kmeans_micro.json"


def report(n: int, ok: bool, title: str, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  #{n:<2} {title}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


# -- 1-5: exact anchors ------------------------------------------------------

def test_01_expected_gain_worked_example():
    g = mean_net_gain_per_win(600, DEFAULT_CONSTANTS)
    report(1, abs(g - (-4448.319)) <= 0.01, "expected net gain of a $600 win",
           f"{g:.6f} vs -4448.319 +/- 0.01")


def test_02_scripted_ticket_replay():
    table = PrizeTable("ten-dollar", 1000, ((2000, 0.1), (100000, 0.01)))
    script = [0.5] * 97 + [0.05, 0.05] + [0.105]   # 97 blanks, two $20 prizes, recorded win
    out = simulate_win_ticket_loop(WinSimSpec(60000, table), iter(script))
    ok = (out.tickets_bought, out.small_prize_cents, out.net_gain_cents) == (100, 4000, -36000)
    report(2, ok, "scripted ticket-loop replay",
           f"tickets={out.tickets_bought} small=${out.small_prize_total:.2f} net=${out.net_gain:.2f} (want -360)")


def test_03_bonferroni_quantiles():
    lo, hi = bonferroni_quantiles(0.80, 4320)
    ok = (f"{lo:.5g}" == "0.0023148" and f"{hi:.7g}" == "99.99769"
          and math.isclose(lo, 10 / 4320, rel_tol=1e-12) and math.isclose(hi, 100 - 10 / 4320, rel_tol=1e-12))
    report(3, ok, "Bonferroni percentiles for B=4320", f"({lo:.7g}%, {hi:.7g}%)")


def test_04_entropy_anchors():
    h1 = entropy(profile_from_counts("single", [7]))
    h5 = entropy(profile_from_counts("uniform5", [1] * 5))
    ok = h1 == 0.0 and abs(h5 - math.log(5)) <= 1e-12
    report(4, ok, "entropy anchors", f"single-store={h1!r}, uniform-5 - ln5 = {h5 - math.log(5):.2e}")


def test_05_feature_vector_anchor():
    v = feature_vector(profile_from_counts("ten", [2] * 10)).tolist()
    report(5, v == [0.1, 0.1, 0.1, 0.1, 0.1, 0.5], "ten stores x two wins feature vector", str(v))


# -- 6-7: simulator statistics --------------------------------------------------

def _var_se(x):
    """Standard error of the sample variance."""
    n = x.size
    m = x.mean()
    m2 = ((x - m) ** 2).mean()
    m4 = ((x - m) ** 4).mean()
    return math.sqrt(max(m4 - m2 * m2, 0.0) / n)


def test_06_fast_vs_loop_equivalence():
    table = PrizeTable("three-entry", 100, ((200, 0.3), (500, 0.1), (70000, 0.05)))
    spec = WinSimSpec(70000, table)
    n = 100_000
    seeds = SeedSpec(20200320)
    tf, sf, nf = win_outcomes(spec, seeds.win_keys("fast", 0, np.arange(n)), "fast")
    tl, sl, nl = win_outcomes(spec, seeds.win_keys("loop", 0, np.arange(n)), "loop")
    zs = {}
    for name, a, b in (("tickets", tf, tl), ("small", sf / 100, sl / 100)):
        a, b = a.astype(float), b.astype(float)
        zs[f"{name} mean"] = abs(a.mean() - b.mean()) / math.sqrt(a.var() / n + b.var() / n)
        zs[f"{name} var"] = abs(a.var() - b.var()) / math.hypot(_var_se(a), _var_se(b))
    ks = stats.ks_2samp(nf, nl)
    ok = max(zs.values()) <= 4 and ks.pvalue >= 0.01
    detail = ", ".join(f"{k} z={v:.2f}" for k, v in zs.items()) + f", KS p={ks.pvalue:.3f}"
    report(6, ok, "fast vs ticket-loop engines (1e5 replicates)", detail)


def test_07_analytic_anchor():
    spec = WinSimSpec(60000, screening_matched_table(DEFAULT_CONSTANTS))
    n = 100_000
    _, _, net = win_outcomes(spec, SeedSpec(20200320).win_keys("anchor", 0, np.arange(n)), "fast")
    net = net / 100
    se = net.std(ddof=1) / math.sqrt(n)
    z = abs(net.mean() - (-4448.319)) / se
    report(7, z <= 4, "simulated $600 win on the matched table",
           f"mean={net.mean():.2f} SE={se:.2f} |z|={z:.2f} vs -4448.319")


# -- 8, 10: full pipeline on the shipped corpus ---------------------------------

def _run_pipeline(out: Path, threads: int) -> float:
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    t0 = time.perf_counter()
    subprocess.run([sys.executable, "-m", "lottoscan.cli", "pipeline", "--out", str(out),
                    "--threads", str(threads)], check=True, env=env, capture_output=True)
    return time.perf_counter() - t0


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    secs = [_run_pipeline(base / "t1", 1), _run_pipeline(base / "t4", 4)]
    return base / "t1", base / "t4", secs


def _tree(d: Path) -> dict:
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_08_pipeline_determinism_across_threads(pipeline_runs):
    a, b, secs = pipeline_runs
    ta, tb = _tree(a), _tree(b)
    differing = sorted(k for k in set(ta) | set(tb) if ta.get(k) != tb.get(k))
    report(8, not differing and len(ta) > 20, "pipeline at 1 vs 4 threads",
           f"{len(ta)} files, {len(differing)} differ {differing[:3]}; runtimes {secs[0]:.0f}s/{secs[1]:.0f}s")


def test_10_end_to_end_detection(pipeline_runs):
    out = pipeline_runs[0]
    man = load_manifest(data_path("synthetic_manifest.json.gz"))
    injected = set(man["discounters"])
    flagged = set((out / "flagged.txt").read_text().split())
    expansion = set((out / "expansion.txt").read_text().split())
    recall = len(injected & (flagged | expansion)) / len(injected)
    habitual = {pid for pid, p in man["players"].items()
                if p["label"] == "honest" and len(p["wins"]) >= 5}
    honest_in_exp = expansion & habitual
    share_of_habitual = len(honest_in_exp) / len(habitual)
    share_of_expansion = len(honest_in_exp) / len(expansion) if expansion else 0.0
    ok = recall >= 0.8 and share_of_habitual <= 0.05 and share_of_expansion <= 0.05
    report(10, ok, "discounter recovery on the shipped corpus",
           f"recall={recall:.2f} ({len(injected & (flagged | expansion))}/{len(injected)}; box {len(flagged)}, "
           f"expansion {len(expansion)}), honest habitual in expansion={len(honest_in_exp)} "
           f"({share_of_habitual:.2%} of {len(habitual)} habitual, {share_of_expansion:.0%} of expansion)")


# -- 9: performance ---------------------------------------------------------

def test_09_performance():
    table = PrizeTable("pick4-class", 100, ((100, 0.1), (200, 0.05), (500, 0.02), (2000, 0.005),
                                            (10000, 0.001), (500000, 1e-4)))
    prof = PlayerProfile.from_wins("max-player", [claim("max-player", 5000.0, lottery="pick4-class")] * 277)
    resolver = lambda win: table  # noqa: E731
    simulate_player(prof, resolver, replicates=100)  # compile outside the timing
    t0 = time.perf_counter()
    totals = simulate_player(prof, resolver, replicates=60_000, method="fast")
    secs = time.perf_counter() - t0
    ok = secs < 60 and totals.shape == (60_000,)
    report(9, ok, "277 wins x 60,000 replicates, p_big=1e-4 table",
           f"{secs:.1f}s on {os.cpu_count()} CPU(s) (limit 60s)")


# -- 11: K-means optimality ---------------------------------------------------

def _oracle(X, k):
    n = X.shape[0]
    best = math.inf

    def rec(i, labels, used):
        nonlocal best
        if n - i < k - used:
            return
        if i == n:
            lab = np.array(labels)
            best = min(best, sum(((X[lab == c] - X[lab == c].mean(0)) ** 2).sum() for c in range(k)))
            return
        for c in range(min(used + 1, k)):
            labels.append(c)
            rec(i + 1, labels, max(used, c + 1))
            labels.pop()

    rec(0, [], 0)
    return best


def test_11_kmeans_micro_optimality():
    cases = json.loads(FIXTURES.read_text())
    worst, checked = 0.0, 0
    for case in cases:
        X = np.array(case["points"])
        assert X.shape[0] <= 12
        for k_str, stored in case["optimum"].items():
            k = int(k_str)
            opt = _oracle(X, k)
            assert math.isclose(opt, stored, rel_tol=1e-9, abs_tol=1e-15)
            got = kmeans(X, k, seed=0, restarts=50).inertia
            worst = max(worst, (got - opt) / max(opt, 1e-300) if opt > 0 else got)
            checked += 1
    report(11, worst <= 1e-9, "best-of-50 K-means vs exhaustive partitions",
           f"{checked} (case, k) pairs, worst relative excess {worst:.1e}")


# -- 12: single-store mass ---------------------------------------------------

def test_12_entropy_ecdf_at_zero():
    profs = aggregate_players(parse_claims(data_path("synthetic_claims.csv.gz")).records)
    pts = entropy_ecdf(screen_players(profs), 5)
    f0 = ecdf_at(pts, 0.0)
    report(12, abs(f0 - 0.10) <= 0.03, "entropy ECDF mass at 0 (>=5-win players)",
           f"{f0:.4f} vs 0.10 +/- 0.03 over {sum(p.win_count >= 5 for p in profs.values())} players")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
