"""Regenerate the shipped synthetic corpus in src/lottoscan/data from the default spec."""

import shutil
import sys
import tempfile
from pathlib import Path

from lottoscan.cli import main

DATA = Path(__file__).resolve().parents[1] / "src" / "lottoscan" / "data"

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        status = main(["synth", "--out", tmp, *sys.argv[1:]])
        if status:
            sys.exit(status)
        for name in ("synthetic_claims.csv.gz", "synthetic_manifest.json.gz"):
            shutil.copyfile(Path(tmp) / name, DATA / name)
    print(f"wrote corpus to {DATA}")
