"""Labelled synthetic claim corpora: honest habitual players plus injected discounters."""

from __future__ import annotations

import datetime as dt
import gzip
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .ingest import ClaimRecord, normalize_store, open_output, write_claims
from .prizes import PrizeRegistry, PrizeTable

DEFAULT_GAMES_MIX = {
    "$2 Cash Blast": 0.10, "$3 Bingo Bonus": 0.05, "$5 Gold Rush": 0.18,
    "$10 Diamond Deluxe": 0.22, "$20 Mega Cash": 0.15, "$30 Ultimate Riches": 0.10,
    "Pick 4": 0.20,
}

_CHAINS = ["QuickMart", "Food Lion", "Circle K", "Speedway", "Kangaroo Express", "Han-Dee Hugo's",
           "Sheetz", "Harris Teeter", "Walgreens", "Family Fare", "Pantry", "Corner Grocery"]
_STREETS = ["Main St", "Broad St", "Market St", "Hillsborough St", "Wade Ave", "Capital Blvd",
            "Glenwood Ave", "Franklin St", "Tryon Rd", "Elm St", "Church St", "Oak Ave"]
_CITIES = [("Raleigh", "Wake"), ("Durham", "Durham"), ("Charlotte", "Mecklenburg"),
           ("Greensboro", "Guilford"), ("Fayetteville", "Cumberland"), ("Wilmington", "New Hanover")]
_CENTERS = ["Raleigh", "Charlotte", "Greensboro", "Greenville", "Asheville", "Wilmington"]


class SynthError(ValueError):
    pass


@dataclass
class PopulationSpec:
    """Knobs for one synthetic population.

    Defaults give the desk-scale corpus: the published claim and winner
    totals divided by 20.
    """

    n_honest: int = 9877
    n_discounters: int = 20
    target_claims: int | None = 19_590
    casual_continue: float = 0.15  # casual win count = 1 + Geometric, capped at 4
    habitual_share: float = 0.06  # honest players drawn from the habitual law
    habitual_extra_mean: float = 4.0  # habitual win count = 5 + Geometric(mean)
    habitual_max_wins: int = 120
    honest_store_set: tuple = (2, 3, 4, 5)  # personal store-set sizes, uniform
    honest_decay: float = 0.55  # weight of the r-th favourite store = decay ** r
    roamer_share: float = 0.10  # habitual honest players with larger store sets
    roamer_store_set: tuple = (6, 10)
    single_store_share: float = 0.10  # among all players with >= min_wins wins
    min_wins: int = 5
    discounter_wins: tuple = (35, 50)
    discounter_store_spread: tuple = (60, 80)
    n_stores: int = 3000
    games_mix: dict = field(default_factory=lambda: dict(DEFAULT_GAMES_MIX))
    alias_share: float = 0.3  # scratch-off wins emitted under a "$N ..." alias name
    raw_store_noise: float = 0.2  # chance a claim spells its retailer differently
    date_min: str = "2006-03-31"
    date_max: str = "2020-01-31"
    master_seed: int = 20200320

    def validate(self):
        if min(self.n_honest, self.n_discounters) < 0:
            raise SynthError("population counts must be >= 0")
        for name in ("casual_continue", "habitual_share", "roamer_share", "single_store_share",
                     "alias_share", "raw_store_noise"):
            if not 0 <= getattr(self, name) <= 1:
                raise SynthError(f"{name} must be a fraction")
        if self.n_discounters and self.discounter_store_spread[1] > self.n_stores:
            raise SynthError("store universe smaller than discounter spread")
        if not self.games_mix or any(w < 0 for w in self.games_mix.values()):
            raise SynthError("games_mix must be a non-empty non-negative weighting")

    @classmethod
    def full_scale(cls, **kw) -> "PopulationSpec":
        """Full-size population: 391,791 claims over 197,930 winners."""
        base = dict(n_honest=197_910, n_discounters=20, target_claims=391_791,
                    habitual_share=0.01, casual_continue=0.45, n_stores=6000)
        base.update(kw)
        return cls(**base)

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationSpec":
        d = dict(d)
        for k in ("honest_store_set", "roamer_store_set", "discounter_wins", "discounter_store_spread"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Store:
    name: str
    address: str

    @property
    def key(self):
        return normalize_store(self.name, self.address)


def _store_universe(n, rng):
    stores, seen = [], set()
    while len(stores) < n:
        s = _Store(f"{rng.choice(_CHAINS)} #{int(rng.integers(1, 999))}",
                   f"{int(rng.integers(100, 9999))} {rng.choice(_STREETS)}")
        if s.key not in seen:
            seen.add(s.key)
            stores.append(s)
    return stores


def _spelling(store: _Store, rng) -> tuple[str, str]:
    """A raw variant of the retailer strings that normalises to the same key."""
    name, addr = store.name, store.address
    variant = int(rng.integers(3))
    if variant == 0:
        return name.upper(), addr.upper() + "."
    if variant == 1:
        return name.replace(" ", "  "), addr.lower()
    return name.lower() + ".", addr + ","


def _big_prize_sampler(table: PrizeTable, threshold_cents: int):
    big = table.big_entries(threshold_cents)
    values = np.array([v for v, _ in big], np.int64)
    probs = np.array([p for _, p in big])
    return values, probs / probs.sum()


def _honest_win_counts(spec, rng):
    n = spec.n_honest
    habitual = rng.random(n) < spec.habitual_share
    casual = np.minimum(1 + rng.geometric(1 - spec.casual_continue, n) - 1, 4)
    extra = rng.geometric(1 / (1 + spec.habitual_extra_mean), n) - 1
    counts = np.where(habitual, np.minimum(spec.min_wins + extra, spec.habitual_max_wins), casual)
    return counts.astype(np.int64)


def _fix_total(counts, target, rng, min_wins):
    """Nudge win counts one claim at a time until the claim total is exact.

    Adds go to one-win players first; removals never push a player across
    the ``min_wins`` boundary so the habitual pool keeps its size.
    """
    diff = int(target - counts.sum())
    while diff != 0:
        if diff > 0:
            pool = np.flatnonzero(counts == 1)
            if pool.size == 0:
                pool = np.flatnonzero(counts != min_wins - 1)
        else:
            pool = np.flatnonzero((counts >= 2) & (counts != min_wins))
        if pool.size == 0:
            raise SynthError("cannot reach target_claims with this population")
        m = min(abs(diff), pool.size)
        counts[rng.choice(pool, m, replace=False)] += 1 if diff > 0 else -1
        diff += -m if diff > 0 else m
    return counts


def generate_population(spec: PopulationSpec, registry: PrizeRegistry, threshold_cents: int = 600_00):
    """Return ``(records, manifest)`` for ``spec``; deterministic in ``spec.master_seed``."""
    spec.validate()
    if len(registry) == 0:
        raise SynthError("empty prize registry")
    games = [g for g, w in sorted(spec.games_mix.items()) if w > 0]
    missing = [g for g in games if g not in registry]
    if missing:
        raise SynthError(f"games_mix names unknown games: {missing}")
    samplers = {g: _big_prize_sampler(registry[g], threshold_cents) for g in games}
    for g, (vals, _) in samplers.items():
        if vals.size == 0:
            raise SynthError(f"{g} has no recorded prizes to sample")
    weights = np.array([spec.games_mix[g] for g in games], float)
    weights /= weights.sum()

    rng = np.random.default_rng(np.random.SeedSequence(spec.master_seed))
    stores = _store_universe(spec.n_stores, rng)
    d0, d1 = dt.date.fromisoformat(spec.date_min), dt.date.fromisoformat(spec.date_max)
    span = (d1 - d0).days

    honest = _honest_win_counts(spec, rng)
    disc = rng.integers(spec.discounter_wins[0], spec.discounter_wins[1] + 1, spec.n_discounters)
    if spec.target_claims is not None:
        honest = _fix_total(honest, spec.target_claims - int(disc.sum()), rng, spec.min_wins)

    # exact single-store quota among players with >= min_wins wins
    hab = np.flatnonzero(honest >= spec.min_wins)
    pool_size = hab.size + int((disc >= spec.min_wins).sum())
    quota = min(round(spec.single_store_share * pool_size), hab.size)
    single = set(rng.choice(hab, quota, replace=False).tolist()) if quota else set()
    remaining = [i for i in hab if i not in single]
    n_roam = round(spec.roamer_share * len(remaining))
    roamers = set(rng.choice(remaining, n_roam, replace=False).tolist()) if n_roam else set()

    n_total = spec.n_honest + spec.n_discounters
    ids = [f"W{i:06d}" for i in rng.permutation(n_total) + 1]
    players = []  # (id, label, wins, store indices, weights)
    for i, w in enumerate(honest):
        if i in single or w == 1:
            k = 1
        elif i in roamers:
            k = int(rng.integers(spec.roamer_store_set[0], spec.roamer_store_set[1] + 1))
        else:
            k = int(rng.choice(spec.honest_store_set))
        k = min(k, spec.n_stores)
        chosen = rng.choice(spec.n_stores, k, replace=False)
        wts = spec.honest_decay ** np.arange(k)
        players.append((ids[i], "honest", int(w), chosen, wts / wts.sum()))
    for j, w in enumerate(disc):
        k = int(rng.integers(spec.discounter_store_spread[0], spec.discounter_store_spread[1] + 1))
        chosen = rng.choice(spec.n_stores, k, replace=False)
        players.append((ids[spec.n_honest + j], "discounter", int(w), chosen, np.full(k, 1.0 / k)))

    records, manifest_players = [], {}
    for pid, label, w, chosen, wts in players:
        picks = rng.choice(chosen.size, w, p=wts)
        if label == "honest" and chosen.size > 1 and w >= 2 and np.unique(picks).size == 1:
            picks[0] = (picks[0] + 1) % chosen.size  # multi-store players use >= 2 stores
        city, county = _CITIES[int(rng.integers(len(_CITIES)))]
        wins = []
        for s in picks:
            g = games[int(rng.choice(len(games), p=weights))]
            vals, probs = samplers[g]
            amount = int(vals[int(rng.choice(vals.size, p=probs))])
            store = stores[chosen[s]]
            name, addr = _spelling(store, rng) if rng.random() < spec.raw_store_noise else (store.name, store.address)
            table = registry[g]
            lottery = g
            if table.game_type == "scratch_off" and rng.random() < spec.alias_share:
                lottery = f"${table.ticket_cost_cents // 100} Scratch #{int(rng.integers(100, 999))}"
            rec = ClaimRecord(
                winner_id=pid, city=city, county=county, game_type=table.game_type,
                prize_cents=amount, lottery_name=lottery,
                claim_center=_CENTERS[int(rng.integers(len(_CENTERS)))],
                paid_date=d0 + dt.timedelta(days=int(rng.integers(span + 1))),
                retailer_name=name, retailer_address=addr,
            )
            records.append(rec)
            wins.append({"game": g, "lottery_name": lottery, "amount_cents": amount, "store": str(store.key)})
        manifest_players[pid] = {
            "label": label,
            "store_weights": {str(stores[c].key): float(p) for c, p in zip(chosen, wts)},
            "wins": wins,
        }
    records.sort(key=lambda r: (r.paid_date, r.winner_id, r.prize_cents, r.lottery_name))
    return records, _manifest(spec, manifest_players, len(records))


def _manifest(spec, players, n_claims):
    hist = Counter(len(p["wins"]) for p in players.values())
    big = 0
    for p in players.values():
        counts = Counter(w["store"] for w in p["wins"])
        n = len(p["wins"])
        h = -sum((c / n) * math.log(c / n) for c in counts.values())
        big += h > math.log(5) + 1e-12
    return {
        "spec": spec.to_dict(),
        "n_claims": n_claims,
        "n_players": len(players),
        "win_histogram": {str(k): hist[k] for k in sorted(hist)},
        "total_reported_cents": sum(w["amount_cents"] for p in players.values() for w in p["wins"]),
        "n_big_players": big,
        "discounters": sorted(pid for pid, p in players.items() if p["label"] == "discounter"),
        "players": {pid: players[pid] for pid in sorted(players)},
    }


def write_population(records, manifest, claims_path, manifest_path) -> None:
    write_claims(records, claims_path)
    with open_output(manifest_path) as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> dict:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return json.load(fh)
