"""Prize tables, return rates and game resolution."""

from __future__ import annotations

import json
import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .money import format_cents, to_cents

PROB_TOL = 1e-12
BIG_PRIZE_THRESHOLD_CENTS = 600_00


class PrizeTableError(ValueError):
    pass


class ResolutionError(LookupError):
    pass


class UnusableTableError(ValueError):
    pass


@dataclass(frozen=True)
class PrizeTable:
    """One game as a single categorical draw per ticket.

    ``entries`` holds ``(value_cents, probability)`` pairs; whatever mass is
    left over is the no-prize outcome.
    """

    game_name: str
    ticket_cost_cents: int
    entries: tuple[tuple[int, float], ...]
    game_type: str = "scratch_off"
    source: str = ""

    def __post_init__(self):
        if self.ticket_cost_cents <= 0:
            raise PrizeTableError(f"{self.game_name}: ticket cost must be positive")
        if not self.entries:
            raise PrizeTableError(f"{self.game_name}: no prize entries")
        seen = set()
        for value, prob in self.entries:
            if value <= 0:
                raise PrizeTableError(f"{self.game_name}: prize value must be positive, got {value}")
            if value in seen:
                raise PrizeTableError(f"{self.game_name}: duplicate prize value {format_cents(value)}")
            seen.add(value)
            if not prob > 0 or prob > 1:
                raise PrizeTableError(f"{self.game_name}: probability must lie in (0, 1], got {prob}")
        total = sum(p for _, p in self.entries)
        if total > 1 + PROB_TOL:
            raise PrizeTableError(f"{self.game_name}: probabilities sum to {total!r} > 1")

    @property
    def ticket_cost(self) -> float:
        return self.ticket_cost_cents / 100

    def small_entries(self, threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS):
        return [(v, p) for v, p in self.entries if v <= threshold_cents]

    def big_entries(self, threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS):
        return [(v, p) for v, p in self.entries if v > threshold_cents]

    def to_dict(self) -> dict:
        d = {
            "game_name": self.game_name,
            "game_type": self.game_type,
            "ticket_cost": format_cents(self.ticket_cost_cents),
            "entries": [{"value": format_cents(v), "probability": p} for v, p in self.entries],
        }
        if self.source:
            d["source"] = self.source
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "PrizeTable":
        name = d.get("game_name")
        if not name:
            raise PrizeTableError("prize table without game_name")
        try:
            entries = tuple((to_cents(e["value"]), float(e["probability"])) for e in d["entries"])
            cost = to_cents(d["ticket_cost"])
        except (KeyError, TypeError) as exc:
            raise PrizeTableError(f"{name}: malformed table ({exc})") from None
        except ValueError as exc:
            raise PrizeTableError(f"{name}: {exc}") from None
        return cls(name, cost, entries, d.get("game_type", "scratch_off"), d.get("source", ""))


def p_big(table: PrizeTable, threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS) -> float:
    """Probability that one ticket wins a recorded (over-threshold) prize."""
    return sum(p for v, p in table.entries if v > threshold_cents)


def small_return_rate(table: PrizeTable, threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS) -> float:
    return sum(v * p for v, p in table.entries if v <= threshold_cents) / table.ticket_cost_cents


def expected_return_rate(table: PrizeTable) -> float:
    return sum(v * p for v, p in table.entries) / table.ticket_cost_cents


class PrizeRegistry(Mapping):
    """Immutable name -> PrizeTable lookup."""

    def __init__(self, tables=()):
        self._tables: dict[str, PrizeTable] = {}
        for t in tables:
            if t.game_name in self._tables:
                raise PrizeTableError(f"duplicate game_name {t.game_name!r}")
            self._tables[t.game_name] = t

    def __getitem__(self, name: str) -> PrizeTable:
        return self._tables[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tables)

    def __len__(self) -> int:
        return len(self._tables)

    def by_type_and_cost(self, game_type: str, cost_cents: int) -> list[PrizeTable]:
        return [t for t in self._tables.values()
                if t.game_type == game_type and t.ticket_cost_cents == cost_cents]

    def to_dict(self) -> dict:
        return {"tables": [t.to_dict() for t in self._tables.values()]}


def load_prize_tables(source) -> PrizeRegistry:
    """Load tables from a path, an open file, or already-parsed JSON."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        data = source
    raw = data["tables"] if isinstance(data, Mapping) else data
    return PrizeRegistry(PrizeTable.from_dict(d) for d in raw)


def dump_prize_tables(registry: PrizeRegistry, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(registry.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class ReturnRates:
    year: int
    g_all: float
    g_big: float
    s_all: float
    R: float
    R_s: float

    @property
    def g_small(self) -> float:
        return self.g_all - self.g_big


def return_rates_from_totals(year: int, g_all: float, g_big: float, s_all: float) -> ReturnRates:
    if not s_all > 0:
        raise ValueError("total sales must be positive")
    if not 0 <= g_big <= g_all:
        raise ValueError("need 0 <= big-prize total <= all-prize total")
    return ReturnRates(year, g_all, g_big, s_all, g_all / s_all, (g_all - g_big) / s_all)


# -- game resolution -------------------------------------------------------

_PRICE_RE = re.compile(r"\$\s*(\d+(?:\.\d{1,2})?)")


@dataclass
class GameMapping:
    """First-match-wins rules sending lottery names to registry tables.

    Rule forms (``match`` key):
      ``{"name": "Cash 5"}``                          exact name, case-insensitive
      ``{"pattern": "^Pick 4"}``                      regular expression search
      ``{"game_type": "scratch_off", "ticket_cost": 10}``  price fallback
    ``prices`` gives explicit ticket prices for names that do not carry a
    ``$N`` token.
    """

    rules: list[dict] = field(default_factory=list)
    prices: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping) -> "GameMapping":
        prices = {k.casefold(): to_cents(v) for k, v in d.get("prices", {}).items()}
        rules = []
        for i, rule in enumerate(d.get("rules", [])):
            match, game = rule.get("match"), rule.get("game")
            if not isinstance(match, Mapping) or not game:
                raise ValueError(f"mapping rule {i} needs 'match' and 'game'")
            m = dict(match)
            if "ticket_cost" in m:
                m["ticket_cost"] = to_cents(m["ticket_cost"])
            if "pattern" in m:
                m["_re"] = re.compile(m["pattern"], re.IGNORECASE)
            rules.append({"match": m, "game": game})
        return cls(rules, prices)

    @classmethod
    def load(cls, path) -> "GameMapping":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def ticket_price(self, lottery_name: str) -> int | None:
        if lottery_name.casefold() in self.prices:
            return self.prices[lottery_name.casefold()]
        m = _PRICE_RE.search(lottery_name)
        return to_cents(m.group(1)) if m else None

    def lookup(self, lottery_name: str, game_type: str) -> str | None:
        price = None
        for rule in self.rules:
            m = rule["match"]
            if "name" in m:
                if m["name"].casefold() == lottery_name.casefold():
                    return rule["game"]
            elif "_re" in m:
                if m["_re"].search(lottery_name):
                    return rule["game"]
            elif "ticket_cost" in m:
                if "game_type" in m and m["game_type"] != game_type:
                    continue
                if price is None:
                    price = self.ticket_price(lottery_name)
                if price == m["ticket_cost"]:
                    return rule["game"]
        return None


def resolve_game(record, registry: PrizeRegistry, mapping: GameMapping | None = None,
                 threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS) -> PrizeTable:
    """Table used to simulate ``record``: exact registry name first, then mapping rules."""
    name = record.lottery_name
    table = registry.get(name)
    if table is None and mapping is not None:
        target = mapping.lookup(name, record.game_type)
        if target is not None:
            if target not in registry:
                raise ResolutionError(f"mapping sends {name!r} to unknown game {target!r}")
            table = registry[target]
    if table is None:
        raise ResolutionError(f"no prize table for lottery {name!r}")
    if not p_big(table, threshold_cents) > 0:
        raise UnusableTableError(f"{table.game_name!r} has no recorded-prize outcome; cannot simulate")
    return table
