"""Rankings, the distance curve, 2-D embedding and provisional clusters.

Everything here is a pure, deterministic function of a DistanceMatrix.
The cluster output is provisional by design: group proposals support the
review, they are not authoritative results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scoring import DistanceMatrix, PairScore

# Chord deviations below this count as an exactly linear curve (no knee).
_KNEE_EPS = 1e-12


@dataclass(frozen=True)
class RankedPairs:
    """Pair scores sorted by ascending distance, name pair as tie-break."""

    entries: tuple[PairScore, ...]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DistanceCurve:
    """Distances in ascending rank order plus the detected slope break.

    `points` are (rank, distance) with ranks starting at 1. `knee_index`
    is the rank of the largest perpendicular deviation from the chord
    joining the first and last point, or None when the curve has fewer
    than 3 points or is exactly linear.
    """

    points: tuple[tuple[int, float], ...]
    knee_index: int | None


@dataclass(frozen=True)
class EmbeddingPoint:
    coin_name: str
    x: float
    y: float


@dataclass(frozen=True)
class ClusterLabel:
    coin_name: str
    cluster_id: int
    provisional: bool = True


def rank_pairs(matrix: DistanceMatrix) -> RankedPairs:
    """Ascending-distance ranking; likely die links come first."""
    entries = sorted(matrix.scores, key=lambda s: (s.distance, s.name1, s.name2))
    return RankedPairs(tuple(entries))


def build_curve(ranked: RankedPairs) -> DistanceCurve:
    """Distance curve of a ranking, with its knee when one exists."""
    if len(ranked) == 0:
        raise ValueError("ranking is empty")
    dist = np.array([e.distance for e in ranked.entries])
    n = len(dist)
    points = tuple((i + 1, float(d)) for i, d in enumerate(dist))
    if n < 3:
        return DistanceCurve(points, None)

    x = np.arange(1, n + 1, dtype=np.float64)
    x1, y1 = 1.0, dist[0]
    x2, y2 = float(n), dist[-1]
    deviation = np.abs((y2 - y1) * x - (x2 - x1) * dist + x2 * y1 - y2 * x1)
    deviation /= np.hypot(y2 - y1, x2 - x1)
    best = int(np.argmax(deviation))
    if deviation[best] <= _KNEE_EPS:
        return DistanceCurve(points, None)
    return DistanceCurve(points, best + 1)


def embed_2d(matrix: DistanceMatrix) -> list[EmbeddingPoint]:
    """Classical metric MDS of the distance matrix onto two dimensions.

    Square the distances, double-center, take the two leading eigenpairs.
    Negative eigenvalues (non-Euclidean inputs) are clamped to zero. Axis
    signs are fixed so each axis' first non-zero loading is positive.
    """
    names = matrix.coin_names
    n = len(names)
    if n == 1:
        return [EmbeddingPoint(names[0], 0.0, 0.0)]

    d = matrix.as_square()
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d * d) @ j
    eigenvalues, eigenvectors = np.linalg.eigh(b)
    order = np.argsort(eigenvalues)[::-1][:2]
    values = np.clip(eigenvalues[order], 0.0, None)
    coords = eigenvectors[:, order] * np.sqrt(values)

    for axis in range(coords.shape[1]):
        col = coords[:, axis]
        nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
        if nonzero.size and col[nonzero[0]] < 0:
            coords[:, axis] = -col
    return [EmbeddingPoint(name, float(xy[0]), float(xy[1])) for name, xy in zip(names, coords)]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def cluster(matrix: DistanceMatrix, threshold: float) -> list[ClusterLabel]:
    """Single-linkage clusters cut at `threshold`, flagged provisional.

    Coins connected through any chain of distances <= threshold share a
    cluster (die links are transitive). Ids are contiguous from 0 in coin
    order. Raising the threshold never splits an existing cluster.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    names = matrix.coin_names
    index = {name: i for i, name in enumerate(names)}
    uf = _UnionFind(len(names))
    for s in matrix.scores:
        if s.distance <= threshold:
            uf.union(index[s.name1], index[s.name2])

    ids: dict[int, int] = {}
    labels = []
    for i, name in enumerate(names):
        root = uf.find(i)
        if root not in ids:
            ids[root] = len(ids)
        labels.append(ClusterLabel(name, ids[root]))
    return labels
