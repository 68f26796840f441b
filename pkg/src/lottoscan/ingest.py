"""Claim-record parsing, store normalisation and per-player aggregation."""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .money import format_cents, to_cents

FIELDS = (
    "winner_id", "city", "county", "game_type", "prize_amount", "lottery_name",
    "claim_center", "paid_date", "retailer_name", "retailer_address",
)
REQUIRED = ("winner_id", "game_type", "prize_amount", "lottery_name",
            "retailer_name", "retailer_address")
RECORDED_PRIZE_MIN_CENTS = 600_00  # recorded prizes are strictly above this

_GAME_TYPES = {
    "scratch_off": "scratch_off", "scratch-off": "scratch_off", "scratch off": "scratch_off",
    "scratch": "scratch_off", "scratcher": "scratch_off", "instant": "scratch_off",
    "online": "online", "draw": "online", "draw game": "online", "terminal": "online",
}


class SchemaError(ValueError):
    """The input cannot be read at all (e.g. a required column is missing)."""


@dataclass(frozen=True, order=True)
class StoreKey:
    normalized_name: str
    normalized_address: str

    def __str__(self):
        return f"{self.normalized_name} | {self.normalized_address}"


@dataclass(frozen=True)
class ClaimRecord:
    winner_id: str
    city: str
    county: str
    game_type: str
    prize_cents: int
    lottery_name: str
    claim_center: str
    paid_date: dt.date | None
    retailer_name: str
    retailer_address: str

    @property
    def prize_amount(self) -> float:
        return self.prize_cents / 100

    @property
    def store(self) -> StoreKey:
        return normalize_store(self.retailer_name, self.retailer_address)

    def sort_key(self):
        return (self.paid_date or dt.date.min, self.lottery_name, self.prize_cents,
                self.retailer_name, self.retailer_address, self.claim_center,
                self.game_type, self.city, self.county, self.winner_id)

    def to_dict(self) -> dict:
        return {
            "winner_id": self.winner_id, "city": self.city, "county": self.county,
            "game_type": self.game_type, "prize_amount": format_cents(self.prize_cents),
            "lottery_name": self.lottery_name, "claim_center": self.claim_center,
            "paid_date": self.paid_date.isoformat() if self.paid_date else "",
            "retailer_name": self.retailer_name, "retailer_address": self.retailer_address,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClaimRecord":
        date = d.get("paid_date") or None
        return cls(
            d["winner_id"], d.get("city", ""), d.get("county", ""), d["game_type"],
            to_cents(d["prize_amount"]), d["lottery_name"], d.get("claim_center", ""),
            dt.date.fromisoformat(date) if date else None,
            d["retailer_name"], d["retailer_address"],
        )


@dataclass(frozen=True)
class RowError:
    row: int  # 1-based data row (header excluded)
    reason: str
    raw: dict = field(default_factory=dict, compare=False)


@dataclass
class SchemaConfig:
    """Maps record fields to input column names and sets parsing rules."""

    columns: dict = field(default_factory=lambda: {f: f for f in FIELDS})
    delimiter: str = ","
    date_formats: tuple = ("%Y-%m-%d", "%m/%d/%Y", "%m/%d/%y")
    date_min: dt.date = dt.date(2006, 3, 31)
    date_max: dt.date = dt.date(2020, 1, 31)

    @classmethod
    def from_dict(cls, d: dict) -> "SchemaConfig":
        cfg = cls()
        cfg.columns = {**cfg.columns, **d.get("columns", {})}
        unknown = set(cfg.columns) - set(FIELDS)
        if unknown:
            raise SchemaError(f"schema maps unknown field(s): {sorted(unknown)}")
        cfg.delimiter = d.get("delimiter", cfg.delimiter)
        if "date_formats" in d:
            cfg.date_formats = tuple(d["date_formats"])
        if "date_min" in d:
            cfg.date_min = dt.date.fromisoformat(d["date_min"])
        if "date_max" in d:
            cfg.date_max = dt.date.fromisoformat(d["date_max"])
        return cfg

    @classmethod
    def load(cls, path) -> "SchemaConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ParseResult:
    records: list[ClaimRecord]
    errors: list[RowError]


# -- store identity ---------------------------------------------------------

_WS = re.compile(r"\s+")
_TRAILING_PUNCT = ".,;:!?-_/\\'\""


def _fold(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).casefold()
    text = _WS.sub(" ", text).strip()
    return text.rstrip(_TRAILING_PUNCT).strip()


def normalize_text(text: str) -> str:
    prev = None
    for _ in range(8):
        if text == prev:
            break
        prev, text = text, _fold(text)
    return text


def normalize_store(raw_name: str, raw_address: str) -> StoreKey:
    """Case-, whitespace- and trailing-punctuation-insensitive store identity."""
    return StoreKey(normalize_text(raw_name or ""), normalize_text(raw_address or ""))


# -- parsing ----------------------------------------------------------------

def _parse_date(text: str, formats) -> dt.date:
    for fmt in formats:
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable paid_date {text!r}")


def _open_text(source):
    if isinstance(source, (str, Path)):
        if str(source).endswith(".gz"):
            return gzip.open(source, "rt", encoding="utf-8", newline="")
        return open(source, encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_claims(source, schema: SchemaConfig | None = None) -> ParseResult:
    """Read claim rows; rows that break record invariants go to ``errors``."""
    schema = schema or SchemaConfig()
    fh = _open_text(source)
    try:
        reader = csv.DictReader(fh, delimiter=schema.delimiter)
        header = reader.fieldnames
        if header is None:
            return ParseResult([], [])
        header = [h.strip() for h in header]
        reader.fieldnames = header
        for f in REQUIRED:
            col = schema.columns.get(f)
            if col not in header:
                raise SchemaError(f"missing required column {col!r} (field {f})")
        cols = {f: c for f, c in schema.columns.items() if c in header}
        records, errors = [], []
        for i, row in enumerate(reader, start=1):
            try:
                records.append(_row_to_record(row, cols, schema))
            except ValueError as exc:
                errors.append(RowError(i, str(exc), dict(row)))
        return ParseResult(records, errors)
    finally:
        if fh is not source:
            fh.close()


def _row_to_record(row: dict, cols: dict, schema: SchemaConfig) -> ClaimRecord:
    get = lambda f: (row.get(cols[f]) or "").strip() if f in cols else ""  # noqa: E731
    winner = get("winner_id")
    if not winner:
        raise ValueError("empty winner_id")
    game_type = _GAME_TYPES.get(get("game_type").casefold())
    if game_type is None:
        raise ValueError(f"unknown game_type {get('game_type')!r}")
    try:
        cents = to_cents(get("prize_amount"))
    except ValueError:
        raise ValueError(f"unparseable prize_amount {get('prize_amount')!r}") from None
    if cents <= RECORDED_PRIZE_MIN_CENTS:
        raise ValueError(f"below recorded-prize threshold: {format_cents(cents)}")
    date = None
    if get("paid_date"):
        date = _parse_date(get("paid_date"), schema.date_formats)
        if not schema.date_min <= date <= schema.date_max:
            raise ValueError(f"paid_date {date} outside {schema.date_min}..{schema.date_max}")
    lottery = get("lottery_name")
    if not lottery:
        raise ValueError("empty lottery_name")
    return ClaimRecord(winner, get("city"), get("county"), game_type, cents, lottery,
                       get("claim_center"), date, get("retailer_name"), get("retailer_address"))


def open_output(path):
    """Text handle for writing; ``.gz`` paths get a gzip stream with a fixed mtime."""
    if str(path).endswith(".gz"):
        raw = gzip.GzipFile(path, "wb", mtime=0)
        return io.TextIOWrapper(raw, encoding="utf-8", newline="")
    return open(path, "w", encoding="utf-8", newline="")


def write_claims(records, path, delimiter: str = ",") -> None:
    with open_output(path) as fh:
        w = csv.DictWriter(fh, fieldnames=list(FIELDS), delimiter=delimiter, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.to_dict())


def write_errors(errors, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "reason"])
        for e in errors:
            w.writerow([e.row, e.reason])


# -- aggregation ------------------------------------------------------------

@dataclass
class PlayerProfile:
    player_id: str
    wins: list[ClaimRecord]
    store_counts: dict[StoreKey, int]
    total_reported_cents: int

    @property
    def win_count(self) -> int:
        return len(self.wins)

    @property
    def store_count(self) -> int:
        return len(self.store_counts)

    @property
    def total_reported_winnings(self) -> float:
        return self.total_reported_cents / 100

    @classmethod
    def from_wins(cls, player_id: str, wins) -> "PlayerProfile":
        wins = sorted(wins, key=ClaimRecord.sort_key)
        if not wins:
            raise ValueError("a profile needs at least one win")
        counts = Counter(w.store for w in wins)
        return cls(player_id, wins, dict(sorted(counts.items())), sum(w.prize_cents for w in wins))

    def merge(self, other: "PlayerProfile") -> "PlayerProfile":
        if other.player_id != self.player_id:
            raise ValueError("cannot merge profiles of different players")
        return PlayerProfile.from_wins(self.player_id, self.wins + other.wins)

    def to_dict(self) -> dict:
        return {
            "player_id": self.player_id,
            "win_count": self.win_count,
            "store_count": self.store_count,
            "total_reported_winnings": format_cents(self.total_reported_cents),
            "store_counts": [
                {"name": k.normalized_name, "address": k.normalized_address, "count": c}
                for k, c in self.store_counts.items()
            ],
            "wins": [w.to_dict() for w in self.wins],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlayerProfile":
        prof = cls.from_wins(d["player_id"], [ClaimRecord.from_dict(w) for w in d["wins"]])
        declared = {StoreKey(s["name"], s["address"]): s["count"] for s in d.get("store_counts", [])}
        if declared and declared != prof.store_counts:
            raise ValueError(f"{d['player_id']}: store_counts disagree with wins")
        return prof


def player_key_for(record: ClaimRecord, identity: str = "name") -> str:
    if identity == "name":
        return record.winner_id
    if identity == "name+city":
        return f"{record.winner_id}|{normalize_text(record.city)}"
    raise ValueError(f"unknown identity rule {identity!r}")


def aggregate_players(records, identity: str = "name") -> dict[str, PlayerProfile]:
    groups: dict[str, list[ClaimRecord]] = {}
    for r in records:
        groups.setdefault(player_key_for(r, identity), []).append(r)
    return {pid: PlayerProfile.from_wins(pid, groups[pid]) for pid in sorted(groups)}


def merge_profile_maps(a: dict, b: dict) -> dict[str, PlayerProfile]:
    out = dict(a)
    for pid, prof in b.items():
        out[pid] = out[pid].merge(prof) if pid in out else prof
    return {pid: out[pid] for pid in sorted(out)}


def write_profiles(profiles, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for prof in profiles.values():
            fh.write(json.dumps(prof.to_dict(), sort_keys=True) + "\n")


def read_profiles(path) -> dict[str, PlayerProfile]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                prof = PlayerProfile.from_dict(json.loads(line))
                out[prof.player_id] = prof
    return {pid: out[pid] for pid in sorted(out)}
