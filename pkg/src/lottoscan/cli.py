"""Command-line entry point: ``lottoscan <stage> [options]``.

Stages read and write a shared output directory, so ``pipeline`` is exactly
``ingest`` -> ``screen`` -> ``cluster`` -> ``simulate`` run by hand. Settings
resolve as defaults < command-line flags < ``--config`` file; every stage
writes ``provenance/<stage>.json`` which can be fed back as ``--config``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _accel
from .config import RunConfig, provenance, resolve_path
from .constants import DEFAULT_CONSTANTS, ModelConstants

log = logging.getLogger("lottoscan")

EXIT_OK, EXIT_FATAL, EXIT_ROW_ERRORS = 0, 1, 2


class FatalError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _need(path: Path, stage: str) -> Path:
    if not path.exists():
        raise FatalError(f"{path} not found; run `lottoscan {stage}` first")
    return path


def _constants(cfg: RunConfig) -> ModelConstants:
    over = dict(cfg.constants)
    over.setdefault("replicates", cfg.replicates)
    over.setdefault("cluster_k", cfg.k)
    over.setdefault("interval_level", cfg.level)
    try:
        return DEFAULT_CONSTANTS.with_overrides(**over)
    except (TypeError, ValueError) as exc:
        raise FatalError(f"bad constants override: {exc}") from exc


def _write_provenance(cfg: RunConfig, stage: str, inputs: dict, stage_files=()) -> None:
    from .report import write_json

    write_json(provenance(cfg, stage, inputs, stage_files), _out(cfg) / "provenance" / f"{stage}.json")


def _registry(cfg: RunConfig):
    from .prizes import GameMapping, PrizeTableError, load_prize_tables

    try:
        registry = load_prize_tables(resolve_path(cfg.prizes))
        mapping = GameMapping.load(resolve_path(cfg.mapping)) if cfg.mapping else None
    except (OSError, ValueError, KeyError, PrizeTableError) as exc:
        raise FatalError(f"cannot load prize tables/mapping: {exc}") from exc
    return registry, mapping


def _profiles(cfg: RunConfig):
    from .ingest import read_profiles

    return read_profiles(_need(_out(cfg) / "profiles.jsonl", "ingest"))


def _read_ids(path: Path) -> list[str]:
    return [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]


def _write_ids(ids, path: Path) -> None:
    path.write_text("".join(f"{i}\n" for i in sorted(ids)), encoding="utf-8")


# -- stages ------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> int:
    from .ingest import (SchemaConfig, SchemaError, aggregate_players, parse_claims,
                         write_errors, write_profiles)
    from .report import write_json

    if not cfg.claims:
        raise FatalError("no claims file given (--claims)")
    out = _out(cfg)
    try:
        schema = SchemaConfig.load(resolve_path(cfg.schema)) if cfg.schema else None
        parsed = parse_claims(resolve_path(cfg.claims), schema)
    except (OSError, SchemaError, ValueError) as exc:
        raise FatalError(f"cannot ingest {cfg.claims}: {exc}") from exc
    profiles = aggregate_players(parsed.records, cfg.identity)
    write_profiles(profiles, out / "profiles.jsonl")
    write_errors(parsed.errors, out / "ingest_errors.csv")
    write_json({"records": len(parsed.records), "row_errors": len(parsed.errors),
                "players": len(profiles), "identity": cfg.identity}, out / "ingest_summary.json")
    _write_provenance(cfg, "ingest", {"claims": cfg.claims, "schema": cfg.schema})
    print(f"ingest: {len(parsed.records)} records, {len(profiles)} players, "
          f"{len(parsed.errors)} row errors")
    return EXIT_ROW_ERRORS if parsed.errors else EXIT_OK


def cmd_screen(cfg: RunConfig) -> int:
    from .prizes import expected_return_rate, p_big, small_return_rate
    from .report import (ecdf_rows, scatter_rows, survival_counts, top_games, write_json,
                         write_table)
    from .screen import (FlagRule, UndefinedCorrelationError, calibrate_rectangle,
                         correlation_logloss_entropy, count_big_players, entropy_ecdf,
                         screen_players)

    out = _out(cfg)
    constants = _constants(cfg)
    profiles = _profiles(cfg)
    results = screen_players(profiles, constants)

    pool = [r for r in results if r.win_count >= cfg.min_wins]
    if cfg.entropy_threshold is not None and cfg.loss_threshold is not None:
        rule, calibrated = FlagRule(cfg.entropy_threshold, cfg.loss_threshold), False
    elif len(pool) < cfg.flag_top:
        log.warning("only %d players with >= %d wins; cannot calibrate a box around %d, flagging none",
                    len(pool), cfg.min_wins, cfg.flag_top)
        rule, calibrated = None, False
    else:
        rule, calibrated = calibrate_rectangle(results, cfg.flag_top, cfg.min_wins), True
        # a single explicit threshold overrides its calibrated counterpart
        rule = FlagRule(cfg.entropy_threshold if cfg.entropy_threshold is not None else rule.entropy_min,
                        cfg.loss_threshold if cfg.loss_threshold is not None else rule.loss_min)
    for r in results:
        r.flagged = rule is not None and r.win_count >= cfg.min_wins and rule.contains(r)
    flagged = sorted(r.player_id for r in results if r.flagged)

    cols = ["player_id", "mean_net_gain", "entropy", "log_mean_net_loss", "win_count",
            "store_count", "total_reported_winnings", "flagged"]
    write_table([r.row() for r in results], cols, out / "screening.csv", out / "screening.json")
    _write_ids(flagged, out / "flagged.txt")

    B = count_big_players(results, constants.big_player_entropy_threshold)
    try:
        corr = correlation_logloss_entropy(results, cfg.min_wins)
    except UndefinedCorrelationError:
        corr = None
    ecdf = entropy_ecdf(results, cfg.min_wins)
    write_json({
        "players": len(results), "players_min_wins": sum(r.win_count >= cfg.min_wins for r in results),
        "big_players_B": B, "correlation_logloss_entropy": corr,
        "rule": None if rule is None else {"entropy_min": rule.entropy_min, "loss_min": rule.loss_min,
                                           "calibrated": calibrated},
        "flagged": flagged,
    }, out / "screen_summary.json")

    plots = out / "plots"
    pv = list(profiles.values())
    write_table(survival_counts(p.win_count for p in pv), ["x", "count"], plots / "wins_survival.csv")
    write_table(survival_counts(p.store_count for p in pv), ["x", "count"], plots / "stores_survival.csv")
    write_table(top_games(profiles), ["lottery_name", "wins"], plots / "top_games.csv")
    write_table(ecdf_rows(ecdf), ["entropy", "fraction"], plots / "entropy_ecdf.csv")
    write_table(scatter_rows([r for r in results if r.win_count >= cfg.min_wins]),
                ["player_id", "entropy", "log_mean_net_loss", "flagged"], plots / "loss_entropy_scatter.csv")
    registry, _ = _registry(cfg)
    thr = constants.threshold_cents
    write_table([{"game_name": t.game_name, "game_type": t.game_type, "ticket_cost": t.ticket_cost,
                  "p_big": p_big(t, thr), "small_return_rate": small_return_rate(t, thr),
                  "expected_return_rate": expected_return_rate(t)}
                 for _, t in sorted(registry.items())],
                ["game_name", "game_type", "ticket_cost", "p_big", "small_return_rate",
                 "expected_return_rate"], plots / "return_rates.csv")

    _write_provenance(cfg, "screen", {"prizes": cfg.prizes}, ["profiles.jsonl"])
    box = "none" if rule is None else f"entropy >= {rule.entropy_min:.4f} and log10 loss >= {rule.loss_min:.4f}"
    print(f"screen: {len(results)} players, B = {B}, box {box}")
    print(f"flagged ({len(flagged)}): {' '.join(flagged)}")
    return EXIT_OK


def cmd_cluster(cfg: RunConfig) -> int:
    from .cluster import co_cluster_report, expansion_set, feature_matrix, kmeans, stability_sweep
    from .report import high_entropy_cluster_rows, write_json, write_table
    from .screen import screen_players

    out = _out(cfg)
    profiles = _profiles(cfg)
    flagged = _read_ids(_need(out / "flagged.txt", "screen"))
    ids, X = feature_matrix(profiles, cfg.min_wins)
    if len(ids) == 0:
        raise FatalError(f"no players with >= {cfg.min_wins} wins to cluster")
    distinct = np.unique(X, axis=0).shape[0]
    k = min(cfg.k, distinct)
    if k != cfg.k:
        log.warning("k=%d exceeds %d distinct feature vectors; using k=%d", cfg.k, distinct, k)
    res = kmeans(X, k, cfg.master_seed, cfg.restarts)
    assigns = res.assignments(ids)
    report = co_cluster_report(assigns, flagged)
    expansion = expansion_set(report)
    flagged_set = set(flagged)
    write_table([{"player_id": a.player_id, "cluster_index": a.cluster_index,
                  "distance_to_centroid": a.distance_to_centroid,
                  "flagged": a.player_id in flagged_set, "in_expansion_set": a.player_id in expansion}
                 for a in assigns],
                ["player_id", "cluster_index", "distance_to_centroid", "flagged", "in_expansion_set"],
                out / "clusters.csv", out / "clusters.json")
    write_json({"k": k, "inertia": res.inertia, "n_iter": res.n_iter,
                "clusters": {str(c): {"flagged": f, "others": o} for c, (f, o) in report.items()},
                "expansion": sorted(expansion)}, out / "co_cluster.json")
    _write_ids(expansion, out / "expansion.txt")

    results = screen_players(profiles, _constants(cfg))
    labels = {a.player_id: a.cluster_index for a in assigns}
    write_table(high_entropy_cluster_rows(results, labels, set(report)),
                ["player_id", "entropy", "log_mean_net_loss", "cluster_tag"], out / "plots" / "high_entropy_clusters.csv")

    ks = [kv for kv in cfg.k_values if kv <= distinct]
    rows = stability_sweep(X, ids, ks, cfg.master_seed, flagged, cfg.restarts)
    write_table(rows, ["k", "co_clustered", "flagged_clusters", "expansion_size", "inertia"],
                out / "stability.csv")

    _write_provenance(cfg, "cluster", {}, ["profiles.jsonl", "flagged.txt"])
    print(f"cluster: {len(ids)} players, k = {k}, flagged span {len(report)} cluster(s), "
          f"expansion set {len(expansion)}")
    if expansion:
        print("expansion: " + " ".join(sorted(expansion)))
    return EXIT_OK


def _select_players(cfg: RunConfig, profiles) -> list[str]:
    out = Path(cfg.out)
    which = cfg.players
    if which is None:  # flagged players, plus the co-cluster expansion once cluster has run
        which = "flagged+expansion" if (out / "expansion.txt").exists() else "flagged"
    if which == "all":
        return sorted(profiles)
    if which in ("flagged", "flagged+expansion"):
        ids = set(_read_ids(_need(out / "flagged.txt", "screen")))
        if which == "flagged+expansion":
            ids |= set(_read_ids(_need(out / "expansion.txt", "cluster")))
        return sorted(ids)
    ids = [s.strip() for s in which.split(",") if s.strip()]
    unknown = [i for i in ids if i not in profiles]
    if unknown:
        raise FatalError(f"unknown player id(s): {unknown}")
    return sorted(set(ids))


def cmd_simulate(cfg: RunConfig) -> int:
    from .montecarlo import (SeedSpec, SimulationInputError, TicketCapExceeded,
                             bonferroni_quantiles, simulate_player, summarize)
    from .money import format_cents
    from .prizes import resolve_game
    from .report import round_thousands, simulation_table_text, write_json, write_table

    out = _out(cfg)
    constants = _constants(cfg)
    profiles = _profiles(cfg)
    registry, mapping = _registry(cfg)
    ids = _select_players(cfg, profiles)

    summary_path = out / "screen_summary.json"
    if summary_path.exists():
        B = json.loads(summary_path.read_text(encoding="utf-8"))["big_players_B"]
    else:
        from .screen import count_big_players, screen_players
        B = count_big_players(screen_players(profiles, constants),
                              constants.big_player_entropy_threshold)
    if B < 1:
        log.warning("no big players in the data (B = 0); using B = 1 (no adjustment)")
        B = 1
    q = bonferroni_quantiles(constants.interval_level, B)

    thr = constants.threshold_cents
    resolver = lambda win: resolve_game(win, registry, mapping, thr)  # noqa: E731
    seeds = SeedSpec(cfg.master_seed)
    summaries = []
    totals_dir = out / "totals"
    for pid in ids:
        p = profiles[pid]
        try:
            totals = simulate_player(p, resolver, constants, seeds, cfg.replicates, cfg.method)
        except (SimulationInputError, TicketCapExceeded) as exc:
            raise FatalError(str(exc)) from exc
        summaries.append(summarize(totals, q, pid, B, win_count=p.win_count,
                                   total_reported_winnings=p.total_reported_winnings,
                                   master_seed=cfg.master_seed))
        if cfg.dump_totals:
            write_table([{"replicate": k, "net_gain": format_cents(int(v))} for k, v in enumerate(totals)],
                        ["replicate", "net_gain"], totals_dir / f"{pid}.csv")

    cols = ["player_id", "win_count", "total_reported_winnings", "mean_net_gain", "lower", "upper",
            "replicates", "B_used", "master_seed"]
    raw = [s.to_dict() for s in summaries]
    rounded = [{**r, **{c: round_thousands(r[c]) for c in
                        ("total_reported_winnings", "mean_net_gain", "lower", "upper")}} for r in raw]
    write_table(rounded, cols, out / "simulation.csv")
    write_table(raw, cols + ["lower_quantile", "upper_quantile"],
                out / "simulation_raw.csv", out / "simulation_raw.json")
    (out / "simulation_table.txt").write_text(simulation_table_text(summaries), encoding="utf-8")

    used = ["profiles.jsonl"] + [f for f in ("screen_summary.json", "flagged.txt", "expansion.txt")
                                 if (out / f).exists()]
    _write_provenance(cfg, "simulate", {"prizes": cfg.prizes, "mapping": cfg.mapping}, used)
    print(f"simulate: {len(ids)} players x {cfg.replicates} replicates, B = {B}, "
          f"percentiles ({q[0]:.7g}%, {q[1]:.7g}%)")
    sys.stdout.write(simulation_table_text(summaries))
    return EXIT_OK


def cmd_synth(cfg: RunConfig) -> int:
    from .synth import PopulationSpec, SynthError, generate_population, write_population

    out = _out(cfg)
    registry, _ = _registry(cfg)
    try:
        spec = PopulationSpec.from_dict({"master_seed": cfg.master_seed, **cfg.synth})
        records, manifest = generate_population(spec, registry, _constants(cfg).threshold_cents)
    except (SynthError, TypeError, ValueError) as exc:
        raise FatalError(f"cannot generate population: {exc}") from exc
    write_population(records, manifest, out / "synthetic_claims.csv.gz", out / "synthetic_manifest.json.gz")
    _write_provenance(cfg, "synth", {"prizes": cfg.prizes})
    print(f"synth: {manifest['n_claims']} claims, {manifest['n_players']} players, "
          f"{len(manifest['discounters'])} injected discounters")
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig) -> int:
    status = cmd_ingest(cfg)
    cmd_screen(cfg)
    cmd_cluster(cfg)
    cmd_simulate(cfg)
    return status


COMMANDS = {"ingest": cmd_ingest, "screen": cmd_screen, "cluster": cmd_cluster,
            "simulate": cmd_simulate, "synth": cmd_synth, "pipeline": cmd_pipeline}


# -- argument parsing --------------------------------------------------------

def _k_values(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="JSON config file (or a provenance file); overrides flags")
    a("--claims", help="claims CSV (.gz ok); default: shipped synthetic corpus")
    a("--prizes", help="prize-table JSON; default: shipped illustrative tables")
    a("--mapping", help="game-mapping JSON")
    a("--schema", help="column-mapping JSON for non-default claim layouts")
    a("--out", help="output directory (default: lottoscan-out)")
    a("--seed", dest="master_seed", type=int, help="master seed (default 20200320)")
    a("--replicates", type=int, help="simulation replicates (default 60000)")
    a("--level", type=float, help="central interval level before adjustment (default 0.80)")
    a("--k", type=int, help="K-means cluster count (default 25)")
    a("--restarts", type=int, help="K-means restarts (default 20)")
    a("--min-wins", dest="min_wins", type=int, help="win-count floor for ECDF/box/clustering (default 5)")
    a("--entropy-threshold", dest="entropy_threshold", type=float, help="box entropy cut (nats)")
    a("--loss-threshold", dest="loss_threshold", type=float, help="box log10-loss cut")
    a("--flag-top", dest="flag_top", type=int, help="calibrate the box around this many players (default 9)")
    a("--k-values", dest="k_values", type=_k_values, help="stability sweep k list (default 10,15,20,25,30)")
    a("--identity", choices=["name", "name+city"], help="player identity rule (default name)")
    a("--method", choices=["fast", "loop"], help="simulator engine (default fast)")
    a("--players", help="flagged | flagged+expansion | all | comma-separated ids "
      "(default: flagged+expansion if cluster has run, else flagged)")
    a("--dump-totals", dest="dump_totals", action="store_true", default=None,
      help="write per-player replicate totals to totals/<player>.csv")
    a("--threads", type=int, help="cap worker threads; never changes results")
    a("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lottoscan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"ingest": "parse claims and build player profiles",
             "screen": "expected-loss / entropy screen and outlier box",
             "cluster": "K-means co-cluster expansion and stability sweep",
             "simulate": "Monte Carlo net-gain intervals",
             "synth": "generate a synthetic claims corpus with injected discounters",
             "pipeline": "ingest, screen, cluster, simulate"}
    for name, h in helps.items():
        sub.add_parser(name, parents=[common], help=h, description=h)
    return parser


def main(argv=None) -> int:
    warnings.filterwarnings("ignore", message=".*TBB.*")
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = RunConfig.resolve(flags, args.config)
        if cfg.players is not None and not cfg.players.strip():
            raise FatalError("empty --players")
        if cfg.threads is not None:
            _accel.set_threads(cfg.threads)
        return COMMANDS[args.command](cfg)
    except (FatalError, ValueError, OSError) as exc:
        print(f"lottoscan: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
