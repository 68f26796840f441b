"""Store-behaviour feature vectors and K-means co-clustering with flagged players."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import PlayerProfile

N_TOP = 5
DIM = N_TOP + 1
MAX_ITER = 500
REL_TOL = 1e-8
_CHUNK = 16384


def feature_vector(profile: PlayerProfile) -> np.ndarray:
    """Win shares of the five busiest stores (descending) plus everything else."""
    ranked = sorted(profile.store_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    w = profile.win_count
    v = np.zeros(DIM)
    for i, (_, c) in enumerate(ranked[:N_TOP]):
        v[i] = c / w
    v[N_TOP] = sum(c for _, c in ranked[N_TOP:]) / w
    return v


def feature_matrix(profiles, min_wins: int = 5):
    ids = [pid for pid in sorted(profiles) if profiles[pid].win_count >= min_wins]
    X = np.array([feature_vector(profiles[pid]) for pid in ids]).reshape(len(ids), DIM)
    return ids, X


def _sqdist(X, C):
    out = np.empty((X.shape[0], C.shape[0]))
    for s in range(0, X.shape[0], _CHUNK):
        d = X[s:s + _CHUNK, None, :] - C[None, :, :]
        out[s:s + _CHUNK] = np.einsum("ijk,ijk->ij", d, d)
    return out


def _plusplus(X, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = _sqdist(X, X[centers]).ravel()
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise ValueError("fewer distinct points than clusters")
        # inverse-CDF draw keeps the choice a pure function of one uniform
        j = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
        j = min(j, n - 1)
        while d2[j] == 0:  # cumsum plateau from rounding; step to a real candidate
            j = (j + 1) % n
        centers.append(j)
        d2 = np.minimum(d2, _sqdist(X, X[[j]]).ravel())
    return X[centers].copy()


def _update(X, labels, C):
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k)
    sums = np.stack([np.bincount(labels, weights=X[:, j], minlength=k) for j in range(X.shape[1])], axis=1)
    newC = C.copy()
    nz = counts > 0
    newC[nz] = sums[nz] / counts[nz, None]
    empty = np.flatnonzero(~nz)
    if empty.size:
        far = np.einsum("ij,ij->i", X - newC[labels], X - newC[labels])
        order = np.argsort(-far, kind="stable")
        taken = 0
        for e in empty:
            newC[e] = X[order[taken]]
            taken += 1
    return newC


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    distances: np.ndarray  # squared distance to own centroid
    inertia: float
    n_iter: int
    history: list = field(default_factory=list)

    def assignments(self, ids):
        return [ClusterAssignment(pid, int(c), float(np.sqrt(d)))
                for pid, c, d in zip(ids, self.labels, self.distances)]


@dataclass(frozen=True)
class ClusterAssignment:
    player_id: str
    cluster_index: int
    distance_to_centroid: float


def lloyd(X, C, max_iter: int = MAX_ITER, tol: float = REL_TOL) -> KMeansResult:
    labels = None
    history = []
    for it in range(1, max_iter + 1):
        d2 = _sqdist(X, C)
        new = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(X.shape[0]), new].sum())
        history.append(inertia)
        if labels is not None and np.array_equal(new, labels):
            break
        if len(history) > 1 and abs(history[-2] - inertia) <= tol * max(history[-2], 1e-300):
            labels = new
            break
        labels = new
        C = _update(X, labels, C)
    d2 = _sqdist(X, C)
    labels = np.argmin(d2, axis=1)
    dist = d2[np.arange(X.shape[0]), labels]
    return KMeansResult(C, labels, dist, float(dist.sum()), it, history)


def kmeans(X, k: int, seed: int = 0, restarts: int = 20, max_iter: int = MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm from distance-weighted seeding; best of ``restarts`` by inertia.

    Restart ``r`` draws its seeding from ``SeedSequence([seed, k, r])`` so the
    outcome is fixed by ``(X, k, seed, restarts)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("kmeans needs a non-empty 2-d array")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    n_distinct = np.unique(X, axis=0).shape[0]
    if not 1 <= k <= n_distinct:
        raise ValueError(f"k={k} but only {n_distinct} distinct points")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, k, r]))
        res = lloyd(X, _plusplus(X, k, rng), max_iter)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def co_cluster_report(assignments, flagged) -> dict[int, tuple[list[str], list[str]]]:
    """Clusters holding at least one flagged player -> (flagged members, others)."""
    flagged = set(flagged)
    members: dict[int, list[str]] = {}
    for a in assignments:
        members.setdefault(a.cluster_index, []).append(a.player_id)
    report = {}
    for c in sorted(members):
        f = sorted(p for p in members[c] if p in flagged)
        if f:
            report[c] = (f, sorted(p for p in members[c] if p not in flagged))
    return report


def expansion_set(report) -> set[str]:
    return {p for _, others in report.values() for p in others}


def stability_sweep(X, ids, k_values, seed: int, flagged, restarts: int = 20, exceptions=()):
    """For each k, whether the flagged players (minus ``exceptions``) share one cluster."""
    core = set(flagged) - set(exceptions)
    pos = {pid: i for i, pid in enumerate(ids)}
    rows = []
    for k in k_values:
        res = kmeans(X, k, seed, restarts)
        labels = {int(res.labels[pos[p]]) for p in core if p in pos}
        report = co_cluster_report(res.assignments(ids), flagged)
        rows.append({
            "k": k,
            "co_clustered": len(labels) <= 1,
            "flagged_clusters": len(labels),
            "expansion_size": len(expansion_set(report)),
            "inertia": res.inertia,
        })
    return rows
