"""K-means on eigenvector rows and clustering quality metrics.

Cluster-to-cluster weights use ordered-pair summation: W(A, B) sums W_ij
over all ordered pairs (i in A, j in B), so internal edges count twice and
W(V, V) equals the total strength s.  Modularity and normalized cut are
evaluated on whichever graph the caller passes (original weights by
default; pass the normalized-weight graph to score what was decomposed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolve import EigenBasis
from .graph import Graph, LaplacianMatrix

__all__ = [
    "ClusterAssignment",
    "MetricsRecord",
    "kmeans",
    "modularity",
    "scaled_normalized_cut",
    "cluster_size_stats",
    "scaled_spectrum_energy",
    "metrics_bundle",
]

METRICS_CSV_HEADER = "K,modularity,scaled_nc,scaled_median_size,scaled_max_size,scaled_spectrum_energy"


@dataclass(frozen=True)
class ClusterAssignment:
    """Node labels in 0..k-1 (every id used at least once) plus the k-means inertia."""

    labels: np.ndarray
    k: int
    inertia: float

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True)
class MetricsRecord:
    """The five per-K clustering quality metrics."""

    k: int
    modularity: float
    scaled_nc: float
    scaled_median_size: float
    scaled_max_size: float
    scaled_spectrum_energy: float

    def to_csv_row(self) -> str:
        return (
            f"{self.k},{self.modularity!r},{self.scaled_nc!r},{self.scaled_median_size!r},"
            f"{self.scaled_max_size!r},{self.scaled_spectrum_energy!r}"
        )

    def to_json_dict(self) -> dict:
        return {
            "K": self.k,
            "modularity": self.modularity,
            "scaled_nc": self.scaled_nc,
            "scaled_median_size": self.scaled_median_size,
            "scaled_max_size": self.scaled_max_size,
            "scaled_spectrum_energy": self.scaled_spectrum_energy,
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "MetricsRecord":
        return MetricsRecord(
            k=int(obj["K"]),
            modularity=float(obj["modularity"]),
            scaled_nc=float(obj["scaled_nc"]),
            scaled_median_size=float(obj["scaled_median_size"]),
            scaled_max_size=float(obj["scaled_max_size"]),
            scaled_spectrum_energy=float(obj["scaled_spectrum_energy"]),
        )


def _kmeans_pp_centroids(rows: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = rows.shape[0]
    centroids = np.empty((k, rows.shape[1]))
    centroids[0] = rows[rng.integers(n)]
    dist2 = np.sum((rows - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(dist2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=dist2 / total))
        centroids[c] = rows[idx]
        dist2 = np.minimum(dist2, np.sum((rows - centroids[c]) ** 2, axis=1))
    return centroids


def _lloyd(rows: np.ndarray, centroids: np.ndarray, max_iter: int) -> tuple[np.ndarray, float]:
    k = centroids.shape[0]
    labels = np.full(rows.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = (
            np.sum(rows**2, axis=1)[:, None]
            - 2.0 * rows @ centroids.T
            + np.sum(centroids**2, axis=1)[None, :]
        )
        new_labels = np.argmin(d2, axis=1)
        new_labels, centroids = _repair_empty(rows, new_labels, centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = rows[labels == c]
            if members.size:
                centroids[c] = members.mean(axis=0)
    inertia = float(np.sum((rows - centroids[labels]) ** 2))
    return labels, inertia


def _repair_empty(
    rows: np.ndarray, labels: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Give every empty cluster the point currently farthest from its centroid."""
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    moved: set[int] = set()
    for c in np.flatnonzero(counts == 0):
        dist = np.sum((rows - centroids[labels]) ** 2, axis=1)
        if moved:
            dist[list(moved)] = -1.0
        dist[counts[labels] <= 1] = -1.0  # do not empty another cluster
        idx = int(np.argmax(dist))
        counts[labels[idx]] -= 1
        labels = labels.copy()
        labels[idx] = c
        counts[c] += 1
        centroids[c] = rows[idx]
        moved.add(idx)
    return labels, centroids


def kmeans(
    rows: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 100,
    normalize_rows: bool = False,
) -> ClusterAssignment:
    """Lloyd iteration with k-means++ seeding, best of ``restarts`` by inertia.

    Deterministic for a fixed seed (per-restart RNG streams are derived from
    it).  Empty clusters are repaired by reassigning the farthest point from
    its current centroid.  ``normalize_rows`` switches on unit-row scaling
    of the embedding before clustering.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[:, None]
    n = rows.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if not np.all(np.isfinite(rows)):
        raise ValueError("embedding rows must be finite")
    if normalize_rows:
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        rows = np.where(norms > 0, rows / np.where(norms == 0, 1.0, norms), rows)
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best: tuple[np.ndarray, float] | None = None
    for stream in streams:
        rng = np.random.default_rng(stream)
        centroids = _kmeans_pp_centroids(rows, k, rng)
        labels, inertia = _lloyd(rows, centroids.copy(), max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    labels, inertia = best
    return ClusterAssignment(labels=labels, k=k, inertia=inertia)


def _cluster_weights(g: Graph, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster (internal ordered-pair weight, volume)."""
    coo = g.weights.tocoo()
    same = labels[coo.row] == labels[coo.col]
    internal = np.bincount(labels[coo.row[same]], weights=coo.data[same], minlength=k)
    volume = np.bincount(labels[coo.row], weights=coo.data, minlength=k)
    return internal, volume


def modularity(g: Graph, assignment: ClusterAssignment) -> float:
    """Intra-cluster weight fraction minus the squared volume fraction, summed."""
    labels = assignment.labels
    if labels.shape[0] != g.n:
        raise ValueError("assignment does not match the graph size")
    internal, volume = _cluster_weights(g, labels, assignment.k)
    total = float(volume.sum())
    if total <= 0.0:
        raise ValueError("modularity undefined on a graph with zero total weight")
    frac = volume / total
    return float(np.sum(internal / total - frac * frac))


def scaled_normalized_cut(g: Graph, assignment: ClusterAssignment) -> tuple[float, float]:
    """(NC, NC/K): per-cluster cut weight over cluster volume, and its K-scaled form."""
    labels = assignment.labels
    if labels.shape[0] != g.n:
        raise ValueError("assignment does not match the graph size")
    internal, volume = _cluster_weights(g, labels, assignment.k)
    dead = np.flatnonzero(volume <= 0.0)
    if dead.size:
        raise ValueError(f"cluster {int(dead[0])} has zero strength; normalized cut undefined")
    nc = float(np.sum((volume - internal) / volume))
    return nc, nc / assignment.k


def cluster_size_stats(assignment: ClusterAssignment, n: int) -> tuple[float, float]:
    """(median size / n, max size / n); even counts use the lower median."""
    sizes = np.sort(assignment.sizes())
    median = int(sizes[(assignment.k - 1) // 2])
    return median / n, int(sizes[-1]) / n


def scaled_spectrum_energy(basis: EigenBasis, laplacian: LaplacianMatrix, k: int) -> float:
    """Sum of the K smallest eigenvalues over the Laplacian trace."""
    if k > basis.k:
        raise ValueError(f"basis holds {basis.k} pairs, asked for {k}")
    trace = float(np.sum(laplacian.matrix.diagonal()))
    if trace <= 0.0:
        raise ValueError("spectrum energy undefined: Laplacian trace is zero")
    return float(np.sum(basis.values[:k]) / trace)


def metrics_bundle(
    g_metric: Graph,
    basis: EigenBasis,
    laplacian: LaplacianMatrix,
    assignment: ClusterAssignment,
) -> MetricsRecord:
    """All five metrics for one clustering; Mod and NC score ``g_metric``."""
    mod = modularity(g_metric, assignment)
    _, snc = scaled_normalized_cut(g_metric, assignment)
    median, largest = cluster_size_stats(assignment, g_metric.n)
    energy = scaled_spectrum_energy(basis, laplacian, assignment.k)
    return MetricsRecord(
        k=assignment.k,
        modularity=mod,
        scaled_nc=snc,
        scaled_median_size=median,
        scaled_max_size=largest,
        scaled_spectrum_energy=energy,
    )
