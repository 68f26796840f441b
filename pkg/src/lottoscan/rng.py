"""Counter-based random streams.

Every random number used by the simulator is a pure function of
``(master_seed, player_id, win_index, replicate_index, draw_counter)``:

    player_key = mix(mix(master_seed) ^ blake2b64(player_id))
    stream_key = mix(player_key ^ mix(win_index << 40 | replicate_index))
    u_t        = unit(mix(stream_key + (t + 1) * GOLDEN))

``mix`` is the splitmix64 finalizer (a bijection on 64-bit words), so for a
fixed player the stream keys of distinct ``(win, replicate)`` pairs are
distinct as long as ``replicate < 2**40`` and ``win < 2**24``. No stream
shares state with another, which is what makes results independent of
thread count and scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
REPLICATE_BITS = 40
MAX_REPLICATES = 1 << REPLICATE_BITS
MAX_WINS = 1 << 24
_UNIT = 2.0**-52


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def to_unit(z: int) -> float:
    """Map a 64-bit word to a float strictly inside (0, 1)."""
    return ((z >> 12) + 0.5) * _UNIT


def player_key(master_seed: int, player_id: str) -> int:
    digest = hashlib.blake2b(player_id.encode("utf-8"), digest_size=8).digest()
    return mix64(mix64(master_seed & MASK64) ^ int.from_bytes(digest, "little"))


def stream_key(pkey: int, win_index: int, replicate: int) -> int:
    if not 0 <= win_index < MAX_WINS:
        raise ValueError(f"win_index out of range: {win_index}")
    if not 0 <= replicate < MAX_REPLICATES:
        raise ValueError(f"replicate out of range: {replicate}")
    return mix64(pkey ^ mix64((win_index << REPLICATE_BITS) | replicate))


class CounterStream:
    """Scalar uniform stream; iterate to get successive draws in (0, 1)."""

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def for_win(cls, master_seed: int, player_id: str, win_index: int, replicate: int):
        return cls(stream_key(player_key(master_seed, player_id), win_index, replicate))

    def __iter__(self):
        return self

    def __next__(self) -> float:
        self.counter += 1
        return to_unit(mix64(self.key + self.counter * GOLDEN))


# -- vectorised forms (numpy uint64 arithmetic wraps modulo 2**64) ----------

_G = np.uint64(GOLDEN)
_M1 = np.uint64(MIX1)
_M2 = np.uint64(MIX2)
_S30, _S27, _S31, _S12 = (np.uint64(s) for s in (30, 27, 31, 12))


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


def stream_keys(pkey: int, win_index: int, replicates: np.ndarray) -> np.ndarray:
    reps = np.asarray(replicates, dtype=np.uint64)
    base = np.uint64((win_index << REPLICATE_BITS) & MASK64)
    return mix64_array(np.uint64(pkey) ^ mix64_array(base | reps))


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Draw number ``counters[i]`` (1-based) from stream ``keys[i]``."""
    z = mix64_array(keys + counters.astype(np.uint64) * _G)
    return ((z >> _S12).astype(np.float64) + 0.5) * _UNIT
