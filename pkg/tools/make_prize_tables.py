"""Regenerate src/lottoscan/data/prize_tables.json and game_mapping.json.

The tables are ILLUSTRATIVE: built from a price-scaled prize ladder tuned to
plausible aggregate odds, not transcribed from any published game.
"""

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "lottoscan" / "data"
NOTE = "illustrative representative table (constructed, not transcribed)"

# price -> (probability of any over-$600 prize, target small-prize return rate)
SCRATCH = {1: (2.5e-5, 0.55), 2: (1.2e-4, 0.56), 3: (2.0e-4, 0.56), 5: (4.5e-4, 0.57),
           10: (8.0e-4, 0.58), 20: (1.0e-3, 0.58), 30: (1.1e-3, 0.59)}
NAMES = {1: "Lucky Sevens", 2: "Cash Blast", 3: "Bingo Bonus", 5: "Gold Rush",
         10: "Diamond Deluxe", 20: "Mega Cash", 30: "Ultimate Riches"}
SMALL_MULTS = [1, 2, 4, 10, 20, 50, 100, 200, 500]
SMALL_SHARE = [0.34, 0.22, 0.14, 0.10, 0.07, 0.05, 0.04, 0.02, 0.02]  # of small EV
BIG = [(1_000, 0.9578), (5_000, 0.04), (50_000, 0.002), (100_000, 0.0002)]  # last value scales with price


def scratch_table(price):
    pb, rs = SCRATCH[price]
    entries = []
    small = [(m * price, s) for m, s in zip(SMALL_MULTS, SMALL_SHARE) if m * price <= 600]
    norm = sum(s for _, s in small)
    for value, share in small:
        prob = rs * price * share / norm / value
        entries.append({"value": f"{value}.00", "probability": float(f"{prob:.6g}")})
    for value, share in BIG:
        v = value * price if share == BIG[-1][1] else value
        entries.append({"value": f"{v}.00", "probability": float(f"{pb * share:.6g}")})
    return {"game_name": f"${price} {NAMES[price]}", "game_type": "scratch_off",
            "ticket_cost": f"{price}.00", "entries": entries, "source": NOTE}


ONLINE = [
    {"game_name": "Pick 4", "game_type": "online", "ticket_cost": "1.00",
     "entries": [{"value": "5000.00", "probability": 1e-4}],
     "source": "$1 straight play: 1 in 10,000 pays $5,000"},
    {"game_name": "Cash 5", "game_type": "online", "ticket_cost": "1.00",
     "entries": [{"value": "1.00", "probability": 0.112},
                 {"value": "5.00", "probability": 0.0104},
                 {"value": "250.00", "probability": 0.000218},
                 {"value": "150000.00", "probability": 1.0389e-6}],
     "source": NOTE},
    {"game_name": "Powerball", "game_type": "online", "ticket_cost": "2.00",
     "entries": [{"value": "4.00", "probability": 0.037},
                 {"value": "7.00", "probability": 0.00314},
                 {"value": "100.00", "probability": 0.000151},
                 {"value": "1000000.00", "probability": 1.93e-7},
                 {"value": "40000000.00", "probability": 5.4933e-9}],
     "source": NOTE + "; recorded-prize probability set to 1.984933e-7"},
]


def main():
    tables = [scratch_table(p) for p in SCRATCH] + ONLINE
    (DATA / "prize_tables.json").write_text(json.dumps({"tables": tables}, indent=2) + "\n")
    rules = [{"match": {"pattern": r"^pick\s*4\b"}, "game": "Pick 4"},
             {"match": {"pattern": r"^cash\s*5\b"}, "game": "Cash 5"},
             {"match": {"pattern": r"^powerball\b"}, "game": "Powerball"}]
    rules += [{"match": {"game_type": "scratch_off", "ticket_cost": p}, "game": f"${p} {NAMES[p]}"}
              for p in SCRATCH]
    (DATA / "game_mapping.json").write_text(json.dumps({"prices": {}, "rules": rules}, indent=2) + "\n")


if __name__ == "__main__":
    main()
