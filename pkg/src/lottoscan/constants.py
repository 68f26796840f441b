from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class ModelConstants:
    """Global model constants. Defaults are the published scratch-off averages."""

    p_big_default: float = 0.001226816
    mean_ticket_cost: float = 14.32653
    small_return_rate: float = 0.5677
    big_prize_threshold: float = 600.0
    replicates: int = 60_000
    cluster_k: int = 25
    big_player_entropy_threshold: float = math.log(5)
    interval_level: float = 0.80

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive, got {getattr(self, f.name)!r}")
        if not 0 < self.interval_level < 1:
            raise ValueError("interval_level must lie in (0, 1)")
        if self.p_big_default > 1:
            raise ValueError("p_big_default must be a probability")
        if self.small_return_rate >= 1:
            raise ValueError("small_return_rate must be below 1")

    @property
    def threshold_cents(self) -> int:
        return round(self.big_prize_threshold * 100)

    def with_overrides(self, **overrides) -> "ModelConstants":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown constant(s): {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONSTANTS = ModelConstants()
