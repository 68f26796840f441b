"""Table writers and plot-data emitters. Plots are emitted as data, never rendered."""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path

import numpy as np


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_table(rows, columns, csv_path, json_path=None) -> None:
    """Write rows as CSV and, optionally, a JSON mirror with the same content."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
    if json_path is not None:
        write_json([{c: r.get(c) for c in columns} for r in rows], json_path)


def write_json(obj, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_table(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def survival_counts(values) -> list[dict]:
    """Rows ``(x, players with value >= x)`` for x = 1..max."""
    values = np.asarray(list(values), dtype=np.int64)
    if values.size == 0:
        return []
    hist = np.bincount(values)
    at_least = np.cumsum(hist[::-1])[::-1]
    return [{"x": x, "count": int(at_least[x])} for x in range(1, values.max() + 1)]


def top_games(profiles, n: int = 10) -> list[dict]:
    counts = Counter(w.lottery_name for p in profiles.values() for w in p.wins)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    return [{"lottery_name": g, "wins": c} for g, c in ranked]


def ecdf_rows(points) -> list[dict]:
    return [{"entropy": e, "fraction": f} for e, f in points]


def scatter_rows(results) -> list[dict]:
    return [{"player_id": r.player_id, "entropy": r.entropy,
             "log_mean_net_loss": r.log_mean_net_loss, "flagged": r.flagged} for r in results]


def high_entropy_cluster_rows(results, labels: dict, flag_clusters: set, min_entropy: float = 2.5) -> list[dict]:
    """High-entropy players tagged by whether they share a cluster with a flagged player."""
    rows = []
    for r in results:
        if r.entropy < min_entropy:
            continue
        c = labels.get(r.player_id)
        tag = "none" if c is None else ("flag-cluster" if c in flag_clusters else "other-cluster")
        rows.append({"player_id": r.player_id, "entropy": r.entropy,
                     "log_mean_net_loss": r.log_mean_net_loss, "cluster_tag": tag})
    return rows


def round_thousands(dollars: float) -> int:
    """Nearest $1,000, halves away from zero."""
    k = abs(dollars) / 1000.0
    return int(np.copysign(np.floor(k + 0.5), dollars)) * 1000


def format_k(dollars: float) -> str:
    k = round_thousands(dollars) // 1000
    return f"-${-k}K" if k < 0 else f"${k}K"


def simulation_table_text(summaries) -> str:
    """Fixed-width table in the layout of the published per-player summaries."""
    head = ["Name", "Number of wins", "Total reported winnings", "Mean net gain",
            "Lower net gain", "Upper net gain"]
    body = [[s.player_id, str(s.win_count), format_k(s.total_reported_winnings),
             format_k(s.mean_net_gain), format_k(s.lower), format_k(s.upper)] for s in summaries]
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    line = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([line(head), sep] + [line(r) for r in body]) + "\n"
