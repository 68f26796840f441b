"""Run configuration: defaults < command-line flags < config file."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from . import __version__

PACKAGE_DATA = "package:"


def data_path(name: str) -> Path:
    return Path(str(resources.files("lottoscan") / "data" / name))


def resolve_path(p: str | None) -> Path | None:
    if p is None:
        return None
    if p.startswith(PACKAGE_DATA):
        return data_path(p[len(PACKAGE_DATA):])
    return Path(p)


@dataclass
class RunConfig:
    claims: str | None = PACKAGE_DATA + "synthetic_claims.csv.gz"
    prizes: str = PACKAGE_DATA + "prize_tables.json"
    mapping: str | None = PACKAGE_DATA + "game_mapping.json"
    schema: str | None = None
    out: str = "lottoscan-out"
    master_seed: int = 20200320
    replicates: int = 60_000
    level: float = 0.80
    k: int = 25
    restarts: int = 20
    min_wins: int = 5
    entropy_threshold: float | None = None
    loss_threshold: float | None = None
    flag_top: int = 9
    k_values: list = field(default_factory=lambda: [10, 15, 20, 25, 30])
    identity: str = "name"
    method: str = "fast"
    players: str | None = None  # None: flagged (+ expansion set once cluster has run)
    dump_totals: bool = False
    threads: int | None = None
    constants: dict = field(default_factory=dict)
    return_totals: list = field(default_factory=list)
    synth: dict = field(default_factory=dict)

    # settings that cannot change any output and are kept out of provenance
    _NOT_RECORDED = ("out", "threads")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def resolve(cls, flags: dict, config_file: str | None = None) -> "RunConfig":
        values = asdict(cls())
        values.update({k: v for k, v in flags.items() if v is not None and k in values})
        if config_file:
            with open(config_file, encoding="utf-8") as fh:
                data = json.load(fh)
            if "config" in data and isinstance(data["config"], dict):  # a provenance file
                data = data["config"]
            unknown = set(data) - set(values)
            if unknown:
                raise ValueError(f"unknown config key(s): {sorted(unknown)}")
            values.update(data)
        return cls(**values)

    def recorded(self) -> dict:
        d = asdict(self)
        for k in self._NOT_RECORDED:
            d.pop(k, None)
        return d


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(cfg: RunConfig, stage: str, inputs: dict, stage_files=()) -> dict:
    """Resolved config plus content hashes of every file the stage read.

    ``inputs`` are user-supplied paths; ``stage_files`` are names inside the
    output directory written by earlier stages and are recorded relative to it.
    """
    import numpy

    hashes = {}
    for name, p in sorted(inputs.items()):
        if not p:  # unset or explicitly disabled input
            continue
        hashes[name] = {"path": str(p), "sha256": sha256_of(resolve_path(p))}
    for name in sorted(stage_files):
        hashes[name] = {"path": name, "sha256": sha256_of(Path(cfg.out) / name)}
    return {
        "stage": stage,
        "config": cfg.recorded(),
        "inputs": hashes,
        "versions": {"lottoscan": __version__, "numpy": numpy.__version__,
                     "python": platform.python_version()},
    }
