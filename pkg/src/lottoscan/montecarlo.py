"""Purchase-sequence simulation of recorded wins and Bonferroni-adjusted summaries.

Each recorded win is replayed as a run of ticket purchases from its game's
prize table until a ticket lands on an over-threshold prize; that final
ticket is credited with the *recorded* prize amount. Net gain per win is

    prize + small_prizes_won_on_the_way - tickets_bought * ticket_cost

held in integer cents. Two engines produce the same distribution:

* ``"fast"`` (default) draws the stopping time from a geometric law and the
  small-prize counts of the other ``tickets - 1`` tickets from a multinomial
  with probabilities ``q_x / (1 - p_big)``;
* ``"loop"`` walks ticket by ticket and is kept as the reference.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from . import _kernels_numpy as _np_kernels
from .constants import DEFAULT_CONSTANTS, ModelConstants
from .prizes import BIG_PRIZE_THRESHOLD_CENTS, PrizeTable, p_big
from .rng import MAX_REPLICATES, CounterStream, player_key, stream_key, stream_keys

DEFAULT_TICKET_CAP = 10**9
METHODS = ("fast", "loop")


class TicketCapExceeded(RuntimeError):
    pass


class SimulationInputError(ValueError):
    pass


@lru_cache(maxsize=None)
def _numba_kernels():
    from . import _kernels_numba

    return _kernels_numba


def kernels(engine: str | None = None):
    """Kernel module for ``engine`` ("numba", "numpy" or None for the env default)."""
    if engine is None:
        engine = "numba" if _accel.numba_enabled() else "numpy"
    if engine == "numba":
        return _numba_kernels()
    if engine == "numpy":
        return _np_kernels
    raise ValueError(f"unknown engine {engine!r}")


@dataclass(frozen=True)
class WinSimSpec:
    prize_cents: int
    table: PrizeTable
    threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS

    def __post_init__(self):
        # The final ticket is credited with the recorded prize, so the only
        # hard requirement is that the stopping event can happen.
        if not p_big(self.table, self.threshold_cents) > 0:
            raise SimulationInputError(f"{self.table.game_name}: no recorded-prize outcome")
        if self.prize_cents < 0:
            raise SimulationInputError("negative prize")


@dataclass(frozen=True)
class WinSimOutcome:
    tickets_bought: int
    small_prize_cents: int
    net_gain_cents: int

    @property
    def small_prize_total(self) -> float:
        return self.small_prize_cents / 100

    @property
    def net_gain(self) -> float:
        return self.net_gain_cents / 100


@dataclass(frozen=True)
class TableArrays:
    p_big: float
    small_values: np.ndarray  # cents, int64
    cond_probs: np.ndarray  # small-prize probabilities given "not a recorded win"
    cum: np.ndarray  # cumulative probabilities over all entries, table order
    values: np.ndarray
    is_big: np.ndarray


def table_arrays(table: PrizeTable, threshold_cents: int = BIG_PRIZE_THRESHOLD_CENTS) -> TableArrays:
    pb = p_big(table, threshold_cents)
    small = table.small_entries(threshold_cents)
    sv = np.array([v for v, _ in small], np.int64)
    sp = np.array([p for _, p in small], np.float64)
    cprobs = sp / (1.0 - pb) if pb < 1.0 else np.zeros_like(sp)
    values = np.array([v for v, _ in table.entries], np.int64)
    return TableArrays(
        p_big=min(pb, 1.0),
        small_values=sv,
        cond_probs=cprobs,
        cum=np.cumsum([p for _, p in table.entries]),
        values=values,
        is_big=values > threshold_cents,
    )


def simulate_win_ticket_loop(spec: WinSimSpec, stream, cap: int = DEFAULT_TICKET_CAP) -> WinSimOutcome:
    """Reference engine: one uniform per ticket from ``stream`` (any float iterator)."""
    cost = spec.table.ticket_cost_cents
    cum = np.cumsum([p for _, p in spec.table.entries]).tolist()
    values = [v for v, _ in spec.table.entries]
    tickets = small = 0
    while True:
        tickets += 1
        if tickets > cap:
            raise TicketCapExceeded(f"{spec.table.game_name}: no recorded prize within {cap} tickets")
        u = next(stream)
        for c, edge in enumerate(cum):
            if u < edge:
                if values[c] > spec.threshold_cents:
                    return WinSimOutcome(tickets, small, spec.prize_cents + small - tickets * cost)
                small += values[c]
                break


def _check(tickets):
    if (tickets < 0).any():
        raise TicketCapExceeded("ticket cap exceeded")


def win_outcomes(spec: WinSimSpec, keys, method: str = "fast", engine: str | None = None,
                 cap: int = DEFAULT_TICKET_CAP):
    """Simulate one win on every stream in ``keys``: ``(tickets, small_cents, net_cents)``."""
    arr = table_arrays(spec.table, spec.threshold_cents)
    k = kernels(engine)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if method == "fast":
        tickets, small = k.fast_outcomes(keys, arr.p_big, arr.small_values, arr.cond_probs, cap)
    elif method == "loop":
        tickets, small = k.loop_outcomes(keys, arr.cum, arr.values, arr.is_big, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    _check(tickets)
    net = spec.prize_cents + small - tickets * spec.table.ticket_cost_cents
    return tickets, small, net


def simulate_win_fast(spec: WinSimSpec, stream: CounterStream, engine: str | None = None,
                      cap: int = DEFAULT_TICKET_CAP) -> WinSimOutcome:
    """Fast-engine draw for a single counter-based stream."""
    t, s, n = win_outcomes(spec, [stream.key], "fast", engine, cap)
    return WinSimOutcome(int(t[0]), int(s[0]), int(n[0]))


# -- players -----------------------------------------------------------------

@dataclass(frozen=True)
class SeedSpec:
    """Stream derivation from ``(master_seed, player, win, replicate)``; see ``lottoscan.rng``."""

    master_seed: int

    def player_key(self, player_id: str) -> int:
        return player_key(self.master_seed, player_id)

    def stream_key(self, player_id: str, win_index: int, replicate: int) -> int:
        return stream_key(self.player_key(player_id), win_index, replicate)

    def stream(self, player_id: str, win_index: int, replicate: int) -> CounterStream:
        return CounterStream(self.stream_key(player_id, win_index, replicate))

    def win_keys(self, player_id: str, win_index: int, replicates) -> np.ndarray:
        return stream_keys(self.player_key(player_id), win_index, np.asarray(replicates))


def _player_arrays(profile, resolver, threshold_cents):
    prizes, costs, pbs, offsets = [], [], [], [0]
    small_v, cprobs, cum, values, is_big = [], [], [], [], []
    loop_offsets = [0]
    for j, win in enumerate(profile.wins):
        try:
            table = resolver(win)
        except (LookupError, ValueError) as exc:
            raise SimulationInputError(f"{profile.player_id}: win {j} ({win.lottery_name}): {exc}") from exc
        arr = table_arrays(table, threshold_cents)
        if not arr.p_big > 0:
            raise SimulationInputError(f"{profile.player_id}: win {j}: {table.game_name} cannot produce a recorded win")
        prizes.append(win.prize_cents)
        costs.append(table.ticket_cost_cents)
        pbs.append(arr.p_big)
        small_v.append(arr.small_values)
        cprobs.append(arr.cond_probs)
        offsets.append(offsets[-1] + arr.small_values.size)
        cum.append(arr.cum)
        values.append(arr.values)
        is_big.append(arr.is_big)
        loop_offsets.append(loop_offsets[-1] + arr.values.size)
    cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)  # noqa: E731
    return dict(
        prizes=np.array(prizes, np.int64), costs=np.array(costs, np.int64),
        p_bigs=np.array(pbs, np.float64), offsets=np.array(offsets, np.int64),
        small_values=cat(small_v, np.int64), cond_probs=cat(cprobs, np.float64),
        loop_offsets=np.array(loop_offsets, np.int64), cum=cat(cum, np.float64),
        values=cat(values, np.int64), is_big=cat(is_big, np.bool_),
    )


def simulate_player(profile, resolver, constants: ModelConstants = DEFAULT_CONSTANTS,
                    seeds: SeedSpec = SeedSpec(0), replicates: int | None = None,
                    method: str = "fast", engine: str | None = None,
                    cap: int = DEFAULT_TICKET_CAP, rep_start: int = 0) -> np.ndarray:
    """Per-replicate total net gain (int64 cents) over all of the player's wins.

    ``resolver`` maps a ClaimRecord to its PrizeTable. Replicate ``k`` of win
    ``j`` always uses stream ``(player, j, k)``, so totals do not depend on
    thread count, chunking, or which other players are simulated.
    """
    n = constants.replicates if replicates is None else int(replicates)
    if n < 1 or rep_start < 0 or rep_start + n > MAX_REPLICATES:
        raise ValueError(f"invalid replicate range {rep_start}..{rep_start + n}")
    if profile.win_count < 1:
        raise SimulationInputError("player has no recorded wins")
    a = _player_arrays(profile, resolver, constants.threshold_cents)
    k = kernels(engine)
    pkey = np.uint64(seeds.player_key(profile.player_id))
    if method == "fast":
        totals, bad = k.fast_totals(pkey, a["prizes"], a["costs"], a["p_bigs"], a["offsets"],
                                    a["small_values"], a["cond_probs"], rep_start, n, cap)
    elif method == "loop":
        totals, bad = k.loop_totals(pkey, a["prizes"], a["costs"], a["loop_offsets"], a["cum"],
                                    a["values"], a["is_big"], rep_start, n, cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    if bad >= 0:
        raise TicketCapExceeded(f"{profile.player_id}: win {bad} exceeded {cap} tickets")
    return totals


# -- summaries ---------------------------------------------------------------

def bonferroni_quantiles(level: float = 0.80, B: int = 1) -> tuple[float, float]:
    """Adjusted (lower, upper) percentiles for a central ``level`` interval over ``B`` players."""
    if B < 1:
        raise ValueError("Bonferroni adjustment needs B >= 1")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    tail = 100.0 * (1.0 - level) / 2.0
    return tail / B, 100.0 - tail / B


def nearest_rank(q: float, k: int) -> int:
    """1-based nearest-rank index ``ceil(q * k)`` clamped to ``[1, k]``."""
    # Round before ceil so 0.1 * 60000 stays 6000 rather than 6001.
    return min(max(math.ceil(round(q * k, 9)), 1), k)


def empirical_quantile(sorted_values, percent: float):
    return sorted_values[nearest_rank(percent / 100.0, len(sorted_values)) - 1]


@dataclass
class SimulationSummary:
    player_id: str
    replicates: int
    mean_net_gain: float
    lower: float
    upper: float
    lower_quantile: float  # percent
    upper_quantile: float  # percent
    B_used: int
    win_count: int = 0
    total_reported_winnings: float = 0.0
    master_seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(totals_cents, quantiles: tuple[float, float], player_id: str, B: int,
              **extra) -> SimulationSummary:
    totals = np.asarray(totals_cents)
    if totals.size == 0:
        raise ValueError("no simulated totals to summarise")
    s = np.sort(totals)
    if np.issubdtype(s.dtype, np.integer):
        mean = float(int(s.sum(dtype=np.int64))) / s.size / 100
        scale = 100
    else:
        mean = math.fsum(s.tolist()) / s.size
        scale = 1
    lo, hi = quantiles
    return SimulationSummary(
        player_id=player_id, replicates=int(s.size), mean_net_gain=mean,
        lower=float(empirical_quantile(s, lo)) / scale, upper=float(empirical_quantile(s, hi)) / scale,
        lower_quantile=lo, upper_quantile=hi, B_used=B, **extra,
    )


# -- analytic anchors --------------------------------------------------------

def expected_outcome(spec: WinSimSpec) -> dict:
    """Closed-form mean/variance of tickets, small prizes and net gain (dollars).

    N ~ Geometric(p) on {1, 2, ...}; given N the N - 1 losing tickets carry
    i.i.d. small prizes S with E[S] = sum(v q) / (1 - p). Then
    E[net] = prize + (E[N] - 1) E[S] - E[N] c and
    Var[net] = (E[N] - 1) Var[S] + Var[N] (E[S] - c)^2.
    """
    arr = table_arrays(spec.table, spec.threshold_cents)
    p = arr.p_big
    v = arr.small_values / 100
    cp = arr.cond_probs
    es = float(v @ cp)
    vs = float((v * v) @ cp) - es * es
    en = 1.0 / p
    vn = (1.0 - p) / p**2
    c = spec.table.ticket_cost
    return {
        "tickets_mean": en, "tickets_var": vn,
        "small_mean": (en - 1) * es, "small_var": (en - 1) * vs + vn * es * es,
        "net_mean": spec.prize_cents / 100 + (en - 1) * es - en * c,
        "net_var": (en - 1) * vs + vn * (es - c) ** 2,
    }


def screening_matched_table(constants: ModelConstants = DEFAULT_CONSTANTS, small_prize: float = 20.0) -> PrizeTable:
    """Single-small-prize table whose parameters mirror the geometric screening model.

    Ticket cost is the mean cost rounded to cents, the recorded-win
    probability is ``p_big_default``, and every losing ticket returns
    ``small_return_rate * mean_ticket_cost`` on average.
    """
    p = constants.p_big_default
    cost_cents = round(constants.mean_ticket_cost * 100)
    per_losing_ticket = constants.small_return_rate * constants.mean_ticket_cost
    q = per_losing_ticket / small_prize * (1 - p)
    big_cents = constants.threshold_cents + 100_000
    return PrizeTable(
        "screening-matched", cost_cents,
        ((round(small_prize * 100), q), (big_cents, p)),
        source="constructed from the screening-model constants",
    )
