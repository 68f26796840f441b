"""First-stage screen: expected net gain, store entropy and the outlier box."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import DEFAULT_CONSTANTS, ModelConstants
from .ingest import PlayerProfile

# Entropies within this distance of a threshold count as equal to it, so a
# uniform spread over exactly five stores never passes a strict ln(5) cut
# because of rounding.
ENTROPY_TIE_TOL = 1e-12


class UndefinedCorrelationError(ValueError):
    pass


@dataclass
class ScreeningResult:
    player_id: str
    mean_net_gain: float
    per_win_gains: list[float]
    entropy: float
    log_mean_net_loss: float
    win_count: int
    store_count: int
    total_reported_winnings: float
    flagged: bool = False

    def row(self) -> dict:
        d = asdict(self)
        del d["per_win_gains"]
        return d


@dataclass(frozen=True)
class FlagRule:
    """Rectangle rule: flag when entropy >= ``entropy_min`` and log loss >= ``loss_min``."""

    entropy_min: float
    loss_min: float

    def contains(self, r: ScreeningResult) -> bool:
        return r.entropy >= self.entropy_min - ENTROPY_TIE_TOL and r.log_mean_net_loss >= self.loss_min


def per_win_cost(constants: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Expected out-of-pocket spend behind one recorded win under the geometric model."""
    return (1.0 / constants.p_big_default) * constants.mean_ticket_cost * (1.0 - constants.small_return_rate)


def mean_net_gain_per_win(prize_amount: float, constants: ModelConstants = DEFAULT_CONSTANTS) -> float:
    return prize_amount - per_win_cost(constants)


def total_mean_net_gain(profile: PlayerProfile, constants: ModelConstants = DEFAULT_CONSTANTS):
    """Return ``(mean_net_gain, per_win_gains)``; the total is the exactly rounded sum."""
    gains = [mean_net_gain_per_win(w.prize_cents / 100, constants) for w in profile.wins]
    return math.fsum(gains), gains


def log_mean_net_loss(mean_net_gain: float) -> float:
    return math.log10(-mean_net_gain) if mean_net_gain < -1 else 0.0


def entropy_from_counts(counts, base: float = math.e) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        raise ValueError("entropy of an empty distribution")
    h = -math.fsum((c / total) * math.log(c / total) for c in counts)
    if base != math.e:
        h /= math.log(base)
    return h if h > 0 else 0.0  # also turns -0.0 into 0.0


def entropy(profile: PlayerProfile, base: float = math.e) -> float:
    """Shannon entropy of the player's winning-ticket stores, natural log by default."""
    return entropy_from_counts(profile.store_counts.values(), base)


def screen_player(profile: PlayerProfile, constants: ModelConstants = DEFAULT_CONSTANTS,
                  base: float = math.e) -> ScreeningResult:
    total, gains = total_mean_net_gain(profile, constants)
    return ScreeningResult(
        player_id=profile.player_id,
        mean_net_gain=total,
        per_win_gains=gains,
        entropy=entropy(profile, base),
        log_mean_net_loss=log_mean_net_loss(total),
        win_count=profile.win_count,
        store_count=profile.store_count,
        total_reported_winnings=profile.total_reported_winnings,
    )


def screen_players(profiles, constants: ModelConstants = DEFAULT_CONSTANTS,
                   rule: FlagRule | None = None) -> list[ScreeningResult]:
    results = [screen_player(profiles[pid], constants) for pid in sorted(profiles)]
    if rule is not None:
        flagged = flag_outliers(results, rule)
        for r in results:
            r.flagged = r.player_id in flagged
    return results


def entropy_ecdf(results, min_wins: int = 5) -> list[tuple[float, float]]:
    """Step points ``(entropy, fraction of qualifying players at or below it)``."""
    values = np.sort(np.array([r.entropy for r in results if r.win_count >= min_wins], dtype=float))
    if values.size == 0:
        return []
    uniq, idx = np.unique(values, return_index=True)
    upto = np.append(idx[1:], values.size)
    return [(float(x), float(k) / values.size) for x, k in zip(uniq, upto)]


def ecdf_at(points, x: float) -> float:
    frac = 0.0
    for value, f in points:
        if value <= x:
            frac = f
    return frac


def correlation_logloss_entropy(results, min_wins: int = 5) -> float:
    sel = [r for r in results if r.win_count >= min_wins]
    if len(sel) < 2:
        raise UndefinedCorrelationError("need at least two qualifying players")
    x = np.array([r.log_mean_net_loss for r in sel])
    y = np.array([r.entropy for r in sel])
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = float(xc @ xc), float(yc @ yc)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("zero variance")
    return float(np.clip((xc @ yc) / math.sqrt(sxx * syy), -1.0, 1.0))


def flag_outliers(results, rule: FlagRule) -> set[str]:
    return {r.player_id for r in results if rule.contains(r)}


def calibrate_rectangle(results, top_k: int, min_wins: int = 1) -> FlagRule:
    """Pick the rectangle that isolates ``top_k`` players in the high-loss/high-entropy corner.

    For every entropy cut the loss cut is set to the ``top_k``-th largest loss
    above it; among those candidate boxes the one whose weaker corner
    coordinate (each axis scaled by its maximum) is largest wins. Ties in the
    data can make the box hold more than ``top_k`` players.
    """
    pool = [r for r in results if r.win_count >= min_wins]
    if top_k < 1 or len(pool) < top_k:
        raise ValueError(f"cannot isolate {top_k} players from {len(pool)}")
    ent = np.array([r.entropy for r in pool])
    loss = np.array([r.log_mean_net_loss for r in pool])
    emax, lmax = ent.max() or 1.0, loss.max() or 1.0
    best, best_score = None, -math.inf
    for e0 in np.unique(ent)[::-1]:
        above = np.sort(loss[ent >= e0])[::-1]
        if above.size < top_k:
            continue
        l0 = above[top_k - 1]
        score = min(e0 / emax, l0 / lmax)
        if score > best_score:
            best, best_score = (float(e0), float(l0)), score
    return FlagRule(*best)


def count_big_players(results, threshold: float = math.log(5)) -> int:
    """Number of players whose entropy is strictly above ``threshold``."""
    return sum(1 for r in results if r.entropy > threshold + ENTROPY_TIE_TOL)
