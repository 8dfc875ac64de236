"""Independent brute-force oracles used to pin expected test values.

Everything here is deliberately naive: plain loops, exhaustive
enumeration, bisection. None of it shares code paths with the package
implementations it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from diarkit.timeline import Diarization, Segment


# ---------------------------------------------------------------- DER


def _raw_turns(d: Diarization) -> list[tuple[float, float, str]]:
    return [(seg.onset, seg.offset, lab) for seg, lab in d.turns]


def _collar_intervals(ref_turns, collar):
    out = []
    if collar > 0:
        for on, off, _ in ref_turns:
            for t in (on, off):
                out.append((max(0.0, t - collar), t + collar))
    return out


def _pieces(ref_turns, hyp_turns, collar):
    cuts = {0.0}
    for on, off, _ in ref_turns + hyp_turns:
        cuts.add(on)
        cuts.add(off)
    collars = _collar_intervals(ref_turns, collar)
    for a, b in collars:
        cuts.add(a)
        cuts.add(b)
    points = sorted(cuts)
    pieces = []
    for a, b in zip(points, points[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        if any(lo <= mid < hi for lo, hi in collars):
            continue
        ractive = {lab for on, off, lab in ref_turns if on <= mid < off}
        hactive = {lab for on, off, lab in hyp_turns if on <= mid < off}
        if ractive or hactive:
            pieces.append((b - a, ractive, hactive))
    return pieces


def brute_force_der(ref: Diarization, hyp: Diarization, collar: float = 0.25):
    """(total, miss, fa, confusion) minimizing confusion over all label
    bijections, enumerated exhaustively."""
    ref_turns = _raw_turns(ref)
    hyp_turns = _raw_turns(hyp)
    pieces = _pieces(ref_turns, hyp_turns, collar)
    rlabels = sorted({lab for _, _, lab in ref_turns})
    hlabels = sorted({lab for _, _, lab in hyp_turns})

    total = miss = fa = 0.0
    for dur, ractive, hactive in pieces:
        r, h = len(ractive), len(hactive)
        total += r * dur
        miss += max(0, r - h) * dur
        fa += max(0, h - r) * dur

    best_conf = math.inf
    padded = list(hlabels) + [None] * len(rlabels)
    for perm in itertools.permutations(padded, len(rlabels)):
        mapping = dict(zip(rlabels, perm))
        conf = 0.0
        for dur, ractive, hactive in pieces:
            correct = sum(1 for rl in ractive if mapping[rl] in hactive)
            conf += (min(len(ractive), len(hactive)) - correct) * dur
        best_conf = min(best_conf, conf)
    if not rlabels:
        best_conf = 0.0
    return total, miss, fa, best_conf


# ------------------------------------------------- eigenvalue bisection


def _count_below(a: np.ndarray, x: float) -> int | None:
    """Number of eigenvalues < x via pivot signs of A - xI (no pivoting).

    Returns None when a pivot degenerates; the caller retries with a
    nudged x.
    """
    m = a - x * np.eye(a.shape[0])
    m = m.astype(np.float64).copy()
    n = m.shape[0]
    negatives = 0
    for i in range(n):
        pivot = m[i, i]
        if abs(pivot) < 1e-13:
            return None
        if pivot < 0:
            negatives += 1
        for j in range(i + 1, n):
            factor = m[j, i] / pivot
            m[j, i:] -= factor * m[i, i:]
    return negatives


def _count_below_safe(a: np.ndarray, x: float) -> int:
    shift = 0.0
    for _ in range(60):
        c = _count_below(a, x + shift)
        if c is not None:
            return c
        shift = (shift + 1e-12) * 3.0
    raise RuntimeError("bisection oracle could not evaluate inertia")


def eigvals_by_bisection(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """All eigenvalues of a small symmetric matrix by inertia bisection.

    The pivot-sign count is the classic Sturm-sequence evaluation of the
    characteristic polynomial's leading principal minors.
    """
    n = a.shape[0]
    radius = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0
    out = []
    for k in range(1, n + 1):
        lo, hi = -radius, radius
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _count_below_safe(a, mid) >= k:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


# ------------------------------------------------------ binarization


def brute_force_binarize(a: np.ndarray, p: int) -> np.ndarray:
    n = a.shape[0]
    b = [[0.0] * n for _ in range(n)]
    for i in range(n):
        candidates = [(-a[i][j], j) for j in range(n) if j != i]
        candidates.sort()
        keep = [j for _, j in candidates[: p - 1]]
        b[i][i] = 1.0
        for j in keep:
            b[i][j] = 1.0
    out = [[(b[i][j] + b[j][i]) / 2.0 for j in range(n)] for i in range(n)]
    return np.array(out)


# ------------------------------------------------------------- AHC


def brute_force_average_linkage(
    points: np.ndarray, threshold: float
) -> list[int]:
    """Exhaustive average-linkage trace on cosine distance."""
    m = len(points)
    d = [[0.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i != j:
                d[i][j] = 1.0 - float(np.dot(points[i], points[j]))
    clusters = [[i] for i in range(m)]
    while len(clusters) > 1:
        best = None
        for ci in range(len(clusters)):
            for cj in range(ci + 1, len(clusters)):
                dist = sum(
                    d[x][y] for x in clusters[ci] for y in clusters[cj]
                ) / (len(clusters[ci]) * len(clusters[cj]))
                key = (dist, clusters[ci][0], clusters[cj][0])
                if best is None or key < best[0]:
                    best = (key, ci, cj)
        (dist, _, _), ci, cj = best
        if dist >= threshold:
            break
        clusters[ci] = sorted(clusters[ci] + clusters[cj])
        del clusters[cj]
    labels = [0] * m
    for gid, members in enumerate(sorted(clusters, key=lambda c: c[0])):
        for x in members:
            labels[x] = gid
    return labels


# ----------------------------------------------------------- VAD frames


def frame_count_vad_error(ref_segs, hyp_segs, total: float):
    """Naive 10 ms frame loop; returns (miss%, fa%, error%)."""
    n = int(round(total / 0.01))
    miss = fa = 0
    for i in range(n):
        mid = (i + 0.5) * 0.01
        in_ref = any(on <= mid < off for on, off in ref_segs)
        in_hyp = any(on <= mid < off for on, off in hyp_segs)
        if in_ref and not in_hyp:
            miss += 1
        elif in_hyp and not in_ref:
            fa += 1
    return 100.0 * miss / n, 100.0 * fa / n, 100.0 * (miss + fa) / n


# ------------------------------------------------------------- EER


def exhaustive_eer(scores) -> float:
    """Naive threshold sweep with the same linear interpolation rule."""
    targets = sorted(s for s, t in scores if t)
    nontargets = sorted(s for s, t in scores if not t)
    thresholds = sorted(set(targets) | set(nontargets))
    thresholds.append(thresholds[-1] + 1.0)
    prev = None
    for theta in thresholds:
        fa = sum(1 for s in nontargets if s >= theta) / len(nontargets)
        fr = sum(1 for s in targets if s < theta) / len(targets)
        if fr >= fa:
            if fr == fa or prev is None:
                return fa if fr == fa else fr
            pfa, pfr = prev
            denom = (fr - pfr) - (fa - pfa)
            s = (pfa - pfr) / denom if denom != 0 else 0.0
            return pfa + s * (fa - pfa)
        prev = (fa, fr)
    return prev[0]


# ----------------------------------------------- random diarizations


def random_diarization(
    rng: np.random.Generator,
    recording_id: str,
    max_speakers: int = 4,
    max_turns: int = 20,
    horizon: float = 60.0,
) -> Diarization:
    n_spk = int(rng.integers(1, max_speakers + 1))
    n_turns = int(rng.integers(1, max_turns + 1))
    turns = []
    for _ in range(n_turns):
        onset = float(rng.uniform(0, horizon))
        dur = float(rng.uniform(0.2, 6.0))
        label = f"spk{int(rng.integers(n_spk)):02d}"
        turns.append((Segment(onset, onset + dur), label))
    return Diarization(recording_id, turns)
