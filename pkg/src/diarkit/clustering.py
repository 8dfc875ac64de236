"""Auto-tuning spectral clustering with eigengap speaker counting.

The initial clustering binarizes the cosine affinity row-wise, scans the
number of kept neighbors p, and picks the p whose graph Laplacian shows
the cleanest normalized eigengap; the gap position is the speaker-count
estimate. Two corrections follow: short same-label fragments are
reassigned to an acoustically similar retained speaker, and a final
agglomerative pass merges speakers whose aggregate embeddings are close.
An optional under-clustering step inflates the estimated count before
k-means so the merge pass works from an over-counted start.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .eigh import jacobi_eigh, jacobi_eigvals
from .embeddings import EmbeddingSet, cosine_affinity, validate_affinity
from .timeline import Segment

ZERO_NORM = 1e-12


@dataclass(frozen=True)
class ClusterConfig:
    """Knobs for one scale's clustering pass.

    `max_rp_ratio` caps the binarization search at p <= n * ratio (the
    per-scale tunable of the eigengap scan). The under-cluster step
    multiplies the estimated count by `under_cluster_factor` when it
    exceeds `under_cluster_min_speakers`. Fragments shorter than
    `min_fragment_duration` are reassigned when their best speaker cosine
    reaches `sv_threshold`; `recluster_threshold` is the cosine-distance
    cutoff of the final merge pass.
    """

    max_rp_ratio: float = 0.1
    under_cluster: bool = False
    under_cluster_factor: float = 1.2
    under_cluster_min_speakers: int = 3
    min_fragment_duration: float = 2.5
    sv_threshold: float = 0.15
    recluster_threshold: float = 0.047
    max_speakers: int = 25
    seed: int = 7

    def __post_init__(self):
        if not (0.0 < self.max_rp_ratio <= 1.0):
            raise ValueError(f"max_rp_ratio must be in (0, 1], got {self.max_rp_ratio}")
        if self.max_speakers < 1:
            raise ValueError("max_speakers must be >= 1")
        for name in ("under_cluster_factor", "min_fragment_duration",
                     "sv_threshold", "recluster_threshold"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-window integer labels; labels form the contiguous range [0, k)."""

    labels: tuple[int, ...]
    k: int

    @classmethod
    def from_labels(cls, labels) -> "ClusterAssignment":
        """Compact arbitrary labels to 0..k-1 in order of first appearance."""
        remap: dict[int, int] = {}
        out = []
        for lab in labels:
            lab = int(lab)
            if lab not in remap:
                remap[lab] = len(remap)
            out.append(remap[lab])
        return cls(tuple(out), len(remap))


class NmeResult(NamedTuple):
    p_best: int
    k_est: int
    r_curve: tuple[float, ...]


def _row_order(a: np.ndarray) -> np.ndarray:
    """Per-row column order by descending value, ties to the lower column."""
    n = a.shape[0]
    cols = np.broadcast_to(np.arange(n), (n, n))
    return np.lexsort((cols, -a), axis=-1)


def _binarize_from_order(order: np.ndarray, p: int) -> np.ndarray:
    n = order.shape[0]
    b = np.zeros((n, n), dtype=np.float64)
    for r in range(n):
        row = order[r]
        keep = row[row != r][: p - 1]
        b[r, r] = 1.0
        b[r, keep] = 1.0
    return (b + b.T) / 2.0


def binarize_affinity(a: np.ndarray, p: int) -> np.ndarray:
    """Keep the p strongest entries per row (diagonal always included).

    Ties break toward the lower column index. The result is symmetrized
    as (B + B^T) / 2, so values are {0, 0.5, 1}.
    """
    a = validate_affinity(a)
    n = a.shape[0]
    if not (1 <= p <= n):
        raise ValueError(f"p must be in [1, {n}], got {p}")
    return _binarize_from_order(_row_order(a), p)


def _laplacian(b: np.ndarray) -> np.ndarray:
    return np.diag(b.sum(axis=1)) - b


def nme_estimate(
    a: np.ndarray, max_rp_ratio: float, max_speakers: int = 25
) -> NmeResult:
    """Scan binarization thresholds and estimate the speaker count.

    For each p up to max(2, floor(n * max_rp_ratio)), the unnormalized
    Laplacian of the binarized affinity is decomposed; the largest
    eigengap among the first min(n-1, max_speakers) gaps, normalized by
    the top eigenvalue, scores that p as r_p = (p/n) / gap. The smallest
    ratio wins (ties to the smaller p) and its gap position, clamped to
    [1, max_speakers], is the estimate.
    """
    a = validate_affinity(a)
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least 2 embeddings to estimate a count")
    order = _row_order(a)
    p_max = min(max(2, int(math.floor(n * max_rp_ratio))), n)
    window = min(n - 1, max_speakers)
    best_r = math.inf
    best_p = 1
    best_k = 1
    r_curve = []
    for p in range(1, p_max + 1):
        lam = jacobi_eigvals(_laplacian(_binarize_from_order(order, p)))
        gaps = lam[1 : window + 1] - lam[:window]
        k_p = int(np.argmax(gaps)) + 1
        lam_top = lam[-1]
        g_p = gaps[k_p - 1] / lam_top if lam_top >= 1e-12 else 0.0
        r_p = (p / n) / g_p if g_p > 0 else math.inf
        r_curve.append(r_p)
        if r_p < best_r:
            best_r, best_p, best_k = r_p, p, k_p
    k_est = min(max(best_k, 1), max_speakers)
    return NmeResult(best_p, k_est, tuple(r_curve))


def under_cluster_adjust(k_est: int, cfg: ClusterConfig) -> int:
    """Inflate the estimated count so later re-clustering merges, not splits."""
    if k_est < 1:
        raise ValueError(f"k_est must be >= 1, got {k_est}")
    if not cfg.under_cluster or k_est <= cfg.under_cluster_min_speakers:
        return k_est
    adjusted = math.floor(k_est * cfg.under_cluster_factor + 0.5)
    return max(k_est, min(adjusted, cfg.max_speakers))


def _farthest_point_init(
    x: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty(k, dtype=np.intp)
    centers[0] = int(rng.integers(n))
    dist = np.sum((x - x[centers[0]]) ** 2, axis=1)
    for i in range(1, k):
        centers[i] = int(np.argmax(dist))
        dist = np.minimum(dist, np.sum((x - x[centers[i]]) ** 2, axis=1))
    return x[centers].copy()


def _lloyd(
    x: np.ndarray, centers: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, float]:
    k = centers.shape[0]
    labels = np.zeros(x.shape[0], dtype=np.intp)
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centers[c] = x[members].mean(axis=0)
            else:
                # deterministic empty-cluster fix: steal the worst-fit point
                worst = int(np.argmax(d2[np.arange(len(labels)), labels]))
                new_centers[c] = x[worst]
                labels[worst] = c
        shift = float(np.max(np.sqrt(((new_centers - centers) ** 2).sum(axis=1))))
        centers = new_centers
        if shift < tol:
            break
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(labels)), labels].sum())
    return labels, inertia


def spectral_kmeans(
    a: np.ndarray, p_best: int, k: int, seed: int
) -> ClusterAssignment:
    """Cluster the rows of the k lowest Laplacian eigenvectors.

    k-means uses greedy farthest-point seeding from `seed`, 10 restarts,
    at most 300 iterations, and a 1e-6 centroid-shift tolerance; the best
    inertia wins with ties going to the earlier restart.
    """
    a = validate_affinity(a)
    n = a.shape[0]
    if not (1 <= k <= n):
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if k == 1:
        return ClusterAssignment.from_labels([0] * n)
    system = jacobi_eigh(_laplacian(binarize_affinity(a, p_best)))
    x = np.ascontiguousarray(system.eigenvectors[:, :k])
    rng = np.random.default_rng(seed)
    best: tuple[float, np.ndarray] | None = None
    for _ in range(10):
        centers = _farthest_point_init(x, k, rng)
        labels, inertia = _lloyd(x, centers, max_iter=300, tol=1e-6)
        if best is None or inertia < best[0]:
            best = (inertia, labels)
    return ClusterAssignment.from_labels(best[1])


def _runs(labels: tuple[int, ...]) -> list[tuple[int, int]]:
    """Maximal [start, end) index runs of equal labels, in order."""
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            runs.append((start, i))
            start = i
    return runs


def _weighted_centroid(
    vectors: np.ndarray, durations: np.ndarray, idx: np.ndarray
) -> np.ndarray | None:
    total = durations[idx].sum()
    if total <= 0:
        return None
    c = (vectors[idx] * durations[idx, None]).sum(axis=0) / total
    norm = np.linalg.norm(c)
    if norm < ZERO_NORM:
        return None
    return c / norm


def short_duration_filter(
    asg: ClusterAssignment,
    segments: tuple[Segment, ...],
    vectors: np.ndarray,
    cfg: ClusterConfig,
) -> ClusterAssignment:
    """Reassign short same-label fragments to a similar retained speaker.

    A fragment is a maximal run of consecutive same-label windows whose
    time span is below `min_fragment_duration`. Speakers that own at
    least one non-fragment run are retained; their centroids (duration-
    weighted means over non-fragment windows) are the assignment targets.
    A fragment moves to its most similar retained speaker when the cosine
    reaches `sv_threshold` (ties to the speaker with more retained time),
    otherwise it keeps its label as an unassigned cluster.
    """
    n = len(asg.labels)
    if n != len(segments) or n != len(vectors):
        raise ValueError("assignment, segments, and vectors must align")
    if n == 0:
        return asg
    durations = np.array([s.duration for s in segments], dtype=np.float64)
    runs = _runs(asg.labels)
    fragment = [
        segments[end - 1].offset - segments[start].onset < cfg.min_fragment_duration
        for start, end in runs
    ]
    retained = sorted(
        {asg.labels[start] for (start, end), frag in zip(runs, fragment) if not frag}
    )
    if not retained or all(not f for f in fragment):
        return ClusterAssignment.from_labels(asg.labels)

    labels_arr = np.array(asg.labels)
    keep_mask = np.zeros(n, dtype=bool)
    for (start, end), frag in zip(runs, fragment):
        if not frag:
            keep_mask[start:end] = True
    centroids = {}
    weight = {}
    for lab in retained:
        idx = np.nonzero(keep_mask & (labels_arr == lab))[0]
        c = _weighted_centroid(vectors, durations, idx)
        if c is not None:
            centroids[lab] = c
            weight[lab] = float(durations[idx].sum())
    if not centroids:
        return ClusterAssignment.from_labels(asg.labels)
    cent_labels = sorted(centroids)
    cent_matrix = np.array([centroids[lab] for lab in cent_labels])
    cent_weight = np.array([weight[lab] for lab in cent_labels])

    new_labels = list(asg.labels)
    for (start, end), frag in zip(runs, fragment):
        if not frag:
            continue
        idx = np.arange(start, end)
        c = _weighted_centroid(vectors, durations, idx)
        if c is None:
            continue
        cos = cent_matrix @ c
        best = np.max(cos)
        if best >= cfg.sv_threshold:
            # ties: larger retained duration, then lower label id
            tied = np.nonzero(cos == best)[0]
            winner = tied[np.lexsort((tied, -cent_weight[tied]))][0]
            target = cent_labels[int(winner)]
            for i in range(start, end):
                new_labels[i] = target
    return ClusterAssignment.from_labels(new_labels)


def _average_linkage_merge(
    points: np.ndarray, valid: np.ndarray, threshold: float
) -> list[int]:
    """Greedy AHC on cosine distance; returns a group id per point.

    Cluster distance is the mean pairwise point distance (average
    linkage); merging continues while the minimum distance is strictly
    below `threshold`. Zero-norm points sit at distance 1 from everything.
    """
    m = points.shape[0]
    dist = np.ones((m, m), dtype=np.float64)
    for i in range(m):
        dist[i, i] = 0.0
    if valid.any():
        cos = points @ points.T
        for i in range(m):
            for j in range(m):
                if i != j and valid[i] and valid[j]:
                    dist[i, j] = 1.0 - cos[i, j]
    clusters: list[list[int]] = [[i] for i in range(m)]
    while len(clusters) > 1:
        best = None
        for ci in range(len(clusters)):
            for cj in range(ci + 1, len(clusters)):
                pairs = [(x, y) for x in clusters[ci] for y in clusters[cj]]
                d = sum(dist[x, y] for x, y in pairs) / len(pairs)
                key = (d, clusters[ci][0], clusters[cj][0])
                if best is None or key < best[0]:
                    best = (key, ci, cj)
        (d, _, _), ci, cj = best
        if d >= threshold:
            break
        clusters[ci] = sorted(clusters[ci] + clusters[cj])
        del clusters[cj]
    group = [0] * m
    for gid, members in enumerate(sorted(clusters, key=lambda c: c[0])):
        for x in members:
            group[x] = gid
    return group


def recluster(
    asg: ClusterAssignment,
    segments: tuple[Segment, ...],
    vectors: np.ndarray,
    threshold: float,
) -> ClusterAssignment:
    """Merge speakers whose aggregate embeddings are close.

    Each speaker's embedding is the duration-weighted mean of its window
    embeddings, renormalized (a proxy for re-extraction from the
    concatenated speech). Average-linkage AHC on cosine distance merges
    speakers while the minimum cluster distance is below `threshold`.
    """
    n = len(asg.labels)
    if n != len(segments) or n != len(vectors):
        raise ValueError("assignment, segments, and vectors must align")
    if asg.k <= 1 or threshold <= 0:
        return ClusterAssignment.from_labels(asg.labels)
    durations = np.array([s.duration for s in segments], dtype=np.float64)
    labels_arr = np.array(asg.labels)
    points = np.zeros((asg.k, vectors.shape[1]), dtype=np.float64)
    valid = np.zeros(asg.k, dtype=bool)
    for lab in range(asg.k):
        c = _weighted_centroid(vectors, durations, np.nonzero(labels_arr == lab)[0])
        if c is not None:
            points[lab] = c
            valid[lab] = True
    group = _average_linkage_merge(points, valid, threshold)
    return ClusterAssignment.from_labels([group[lab] for lab in asg.labels])


@dataclass(frozen=True)
class ClusterStages:
    """Intermediate assignments of one recording's clustering pass."""

    initial: ClusterAssignment
    filtered: ClusterAssignment
    final: ClusterAssignment
    estimated_speakers: int


def recording_seed(base_seed: int, recording_id: str) -> int:
    """Stable per-recording RNG seed (independent of Python's hash salt)."""
    digest = hashlib.blake2b(
        recording_id.encode("utf-8"), digest_size=8
    ).digest()
    return (base_seed * 0x100000001B3 + int.from_bytes(digest, "big")) % (2**63)


def cluster_recording(
    embs: EmbeddingSet,
    cfg: ClusterConfig,
    oracle_k: int | None = None,
    return_stages: bool = False,
) -> ClusterAssignment | ClusterStages:
    """Full clustering pass for one recording.

    With 1 window the answer is trivial; with 2 or 3 the eigengap scan is
    meaningless, so singleton clusters are merged directly by the final
    AHC pass. Otherwise: eigengap estimate, optional under-clustering (or
    `oracle_k` in place of the estimate), spectral k-means, short-fragment
    filtering, and the AHC merge, in that order.
    """
    n = len(embs)
    if n < 1:
        raise ValueError("empty embedding set")
    if n == 1:
        asg = ClusterAssignment.from_labels([0])
        stages = ClusterStages(asg, asg, asg, 1)
        return stages if return_stages else asg
    if n <= 3:
        singles = ClusterAssignment.from_labels(range(n))
        final = recluster(
            singles, embs.segments, embs.vectors, cfg.recluster_threshold
        )
        stages = ClusterStages(singles, singles, final, final.k)
        return stages if return_stages else final

    affinity = cosine_affinity(embs)
    estimate = nme_estimate(affinity, cfg.max_rp_ratio, cfg.max_speakers)
    if oracle_k is not None:
        k = min(max(int(oracle_k), 1), cfg.max_speakers, n)
    else:
        k = min(under_cluster_adjust(estimate.k_est, cfg), n)
    seed = recording_seed(cfg.seed, embs.recording_id)
    initial = spectral_kmeans(affinity, estimate.p_best, k, seed)
    filtered = short_duration_filter(initial, embs.segments, embs.vectors, cfg)
    final = recluster(
        filtered, embs.segments, embs.vectors, cfg.recluster_threshold
    )
    stages = ClusterStages(initial, filtered, final, k)
    return stages if return_stages else final
