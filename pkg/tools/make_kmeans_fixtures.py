"""Write tests/fixtures/kmeans_micro.json: small point sets with brute-force optimal inertia.

Each case holds n <= 12 six-dimensional store-share vectors and, for k = 1..3,
the minimum within-cluster sum of squares over every labelling of the points.
"""

import itertools
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "kmeans_micro.json"


def optimum(X, k):
    best = np.inf
    n = X.shape[0]
    for labels in itertools.product(range(k), repeat=n - 1):
        lab = np.array((0,) + labels)
        if len(set(lab.tolist())) != k:
            continue
        sse = sum(((X[lab == c] - X[lab == c].mean(0)) ** 2).sum() for c in range(k))
        best = min(best, sse)
    return float(best)


def shares(counts):
    counts = sorted(counts, reverse=True)
    w = sum(counts)
    v = [c / w for c in counts[:5]] + [0.0] * (5 - min(5, len(counts)))
    return v + [sum(counts[5:]) / w]


def cases(rng):
    yield "habit_vs_spread", [shares(c) for c in
                              ([9], [7, 2], [6, 3, 1], [8, 1, 1], [5, 5], [1] * 20, [2] * 12,
                               [1] * 30, [3, 2, 2, 1, 1, 1, 1, 1], [4, 4, 1, 1])]
    for i in range(4):
        n = int(rng.integers(6, 13))
        pts = [shares(list(rng.integers(1, 8, rng.integers(1, 12)))) for _ in range(n)]
        yield f"random_{i}", pts
    blob = [[0.8 + 0.01 * j, 0.2 - 0.01 * j, 0, 0, 0, 0] for j in range(5)]
    blob += [[0.1, 0.1, 0.1, 0.1, 0.1, 0.5 - 0.01 * j] for j in range(5)]
    yield "two_blobs", blob
    yield "with_duplicates", [shares([1])] * 3 + [shares([2, 2])] * 3 + [shares([1] * 9)] * 2 + [shares([3, 1])]


if __name__ == "__main__":
    rng = np.random.default_rng(20200320)
    out = []
    for name, pts in cases(rng):
        X = np.array(pts, dtype=float)
        n_distinct = np.unique(X, axis=0).shape[0]
        ks = [k for k in (1, 2, 3) if k <= n_distinct]
        out.append({"name": name, "points": X.tolist(),
                    "optimum": {str(k): optimum(X, k) for k in ks}})
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {len(out)} cases to {OUT}")
