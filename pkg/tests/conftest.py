import datetime as dt
import os
import warnings

import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from lottoscan.config import data_path  # noqa: E402
from lottoscan.ingest import ClaimRecord, PlayerProfile  # noqa: E402
from lottoscan.prizes import PrizeTable, load_prize_tables  # noqa: E402

ENGINES = ["numpy"] + (["numba"] if os.environ.get("LOTTOSCAN_DISABLE_NUMBA", "").lower()
                       not in ("1", "true", "yes", "on") else [])


def claim(winner="A", prize=700.0, store=("S1", "1 Main St"), lottery="$10 Diamond Deluxe",
          game_type="scratch_off", date=dt.date(2015, 1, 1), city="Austin"):
    return ClaimRecord(winner, city, "Travis", game_type, round(prize * 100), lottery,
                       "Austin", date, store[0], store[1])


def profile_from_counts(pid, counts, prize=700.0, lottery="$10 Diamond Deluxe"):
    """Profile with ``counts[i]`` wins at store i (prize ``prize`` each)."""
    wins = []
    for i, c in enumerate(counts):
        wins += [claim(pid, prize, (f"store {i:03d}", f"{i} road"), lottery) for _ in range(c)]
    return PlayerProfile.from_wins(pid, wins)


def simple_table(cost_cents=1000, entries=((2000, 0.2), (100000, 0.01)), name="T"):
    return PrizeTable(name, cost_cents, tuple(entries))


@pytest.fixture(scope="session")
def registry():
    return load_prize_tables(data_path("prize_tables.json"))


@pytest.fixture(params=ENGINES)
def engine(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
