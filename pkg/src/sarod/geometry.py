"""Planar configurations, signed angles, distance ratios, and similarity fitting.

A configuration is an (n, 2) float array of pairwise-distinct positions,
indexed by vertex id - 1.  The signed angle at apex i from neighbor j to
neighbor k is the counter-clockwise rotation in [0, 2*pi) carrying the unit
bearing toward j onto the unit bearing toward k; the distance ratio at apex
i is ||p_k - p_i|| / ||p_j - p_i||.  Both are invariant under uniform
rotations, translations, and positive scalings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Bipartition, Graph, TripleIndexSet

__all__ = [
    "CollocationError",
    "Framework",
    "MeasurementSet",
    "SimilarityTransform",
    "rot90",
    "rotation",
    "wrap_angle",
    "signed_angle",
    "ratio_of_distance",
    "rigidity_function",
    "synthesize_measurements",
    "fit_similarity",
]

TWO_PI = 2.0 * np.pi

# R(pi/2), counter-clockwise.
_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])


class CollocationError(ValueError):
    """Raised when distinct vertices share a position (violates Assumption 1)."""


def rot90() -> np.ndarray:
    return _ROT90.copy()


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def wrap_angle(theta):
    """Wrap to [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


def as_points(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError(f"configuration must have shape (n, 2), got {p.shape}")
    return p


def check_distinct(points: np.ndarray, tol: float = 0.0):
    p = as_points(points)
    diff = p[:, None, :] - p[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    if dist.min() <= tol:
        i, j = np.unravel_index(int(dist.argmin()), dist.shape)
        raise CollocationError(f"collocated nodes (Assumption 1): vertices {i + 1} and {j + 1}")


@dataclass(frozen=True)
class Framework:
    """Graph + bipartition + planar configuration."""

    graph: Graph
    bipartition: Bipartition
    points: np.ndarray

    def __post_init__(self):
        p = as_points(self.points)
        if p.shape[0] != self.graph.n:
            raise ValueError("configuration size does not match graph")
        if self.bipartition.n != self.graph.n:
            raise ValueError("bipartition size does not match graph")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "points", p)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    def swapped(self) -> "Framework":
        return Framework(self.graph, self.bipartition.swapped(), self.points)

    def point(self, v: int) -> np.ndarray:
        return self.points[v - 1]


@dataclass(frozen=True)
class MeasurementSet:
    """Exact per-triple measurements: angles in [0, 2*pi), ratios > 0."""

    sa: dict[tuple[int, int, int], float] = field(default_factory=dict)
    rod: dict[tuple[int, int, int], float] = field(default_factory=dict)


def _bearing(points: np.ndarray, i: int, j: int) -> tuple[np.ndarray, float]:
    e = points[j - 1] - points[i - 1]
    d = float(np.linalg.norm(e))
    if d == 0.0:
        raise CollocationError(f"collocated nodes (Assumption 1): vertices {i} and {j}")
    return e / d, d


def signed_angle(points, triple: tuple[int, int, int]) -> float:
    """Signed angle in [0, 2*pi) at the apex, from the first to the second neighbor.

    Computed as atan2(cross, dot) of the two unit bearings and wrapped,
    which equals the two-branch arccos form but keeps full accuracy near
    0 and pi.
    """
    i, j, k = triple
    if len({i, j, k}) != 3:
        raise ValueError(f"triple {triple} must have three distinct vertices")
    p = as_points(points)
    bij, _ = _bearing(p, i, j)
    bik, _ = _bearing(p, i, k)
    cross = bij[0] * bik[1] - bij[1] * bik[0]
    dot = float(bij @ bik)
    return float(wrap_angle(np.arctan2(cross, dot)))


def ratio_of_distance(points, triple: tuple[int, int, int]) -> float:
    """||p_k - p_i|| / ||p_j - p_i|| at apex i."""
    i, j, k = triple
    if len({i, j, k}) != 3:
        raise ValueError(f"triple {triple} must have three distinct vertices")
    p = as_points(points)
    _, dij = _bearing(p, i, j)
    _, dik = _bearing(p, i, k)
    return dik / dij


def rigidity_function(points, sa_triples: TripleIndexSet, rod_triples: TripleIndexSet) -> np.ndarray:
    """Stacked measurement vector: all signed angles first, then all ratios.

    The entry order (SA in ``sa_triples`` order, then RoD in ``rod_triples``
    order) is the row order of the rigidity matrix.
    """
    p = as_points(points)
    vals = [signed_angle(p, t) for t in sa_triples.triples]
    vals += [ratio_of_distance(p, t) for t in rod_triples.triples]
    return np.array(vals, dtype=float)


def synthesize_measurements(points, sa_triples: TripleIndexSet, rod_triples: TripleIndexSet) -> MeasurementSet:
    """Exact measurements over the given triple sets."""
    p = as_points(points)
    sa = {t: signed_angle(p, t) for t in sa_triples.triples}
    rod = {t: ratio_of_distance(p, t) for t in rod_triples.triples}
    return MeasurementSet(sa, rod)


@dataclass(frozen=True)
class SimilarityTransform:
    """q = c * R(theta) p + xi with c > 0."""

    c: float
    theta: float
    xi: np.ndarray

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(2))

    def apply(self, points) -> np.ndarray:
        p = as_points(points)
        return self.c * p @ rotation(self.theta).T + self.xi


def fit_similarity(p, q, tol: float = 1e-8):
    """Least-squares similarity (positive scale, rotation, translation) from p to q.

    Returns (transform, rms_residual, same_shape) where ``same_shape`` is the
    membership verdict rms_residual < tol.  Reflections are excluded: a
    reflected copy of a non-degenerate configuration yields a positive
    residual.
    """
    p = as_points(p)
    q = as_points(q)
    if p.shape != q.shape:
        raise ValueError("configurations must have the same size")
    n = p.shape[0]
    if n < 2:
        raise ValueError("need at least two points to fit a similarity")
    pc = p - p.mean(axis=0)
    qc = q - q.mean(axis=0)
    denom = float((pc**2).sum())
    if denom == 0.0:
        raise CollocationError("collocated nodes (Assumption 1)")
    sdot = float((pc * qc).sum())
    scross = float((pc[:, 0] * qc[:, 1] - pc[:, 1] * qc[:, 0]).sum())
    theta = float(wrap_angle(np.arctan2(scross, sdot)))
    c = float(np.hypot(sdot, scross) / denom)
    if c <= 0.0:
        # Degenerate target (e.g. all points coincide): fall back to unit scale.
        c = 1.0
    xi = q.mean(axis=0) - c * p.mean(axis=0) @ rotation(theta).T
    t = SimilarityTransform(c, theta, xi)
    resid = float(np.sqrt(((t.apply(p) - q) ** 2).sum(axis=1).mean()))
    return t, resid, resid < tol
