"""Evaluation: DER, JER, frame-level VAD error, EER, adaptive score
normalization, speaker-count accuracy, and verification trial generation.

DER follows the challenge convention: a collar around every reference
turn boundary is excluded from scoring, overlap regions are scored, and
the speaker mapping is the exact maximum-overlap one-to-one assignment
(Hungarian method; corpora here reach 20+ speakers, where brute force is
hopeless but the assignment problem is still tiny).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .timeline import Diarization, Segment, Timeline

FRAME = 0.01  # VAD scoring resolution, seconds


@dataclass(frozen=True)
class DerBreakdown:
    total: float
    miss: float
    false_alarm: float
    confusion: float

    @property
    def der(self) -> float:
        errors = self.miss + self.false_alarm + self.confusion
        if self.total <= 0:
            return 0.0 if errors <= 0 else float("inf")
        return errors / self.total


def _collar_timeline(ref: Diarization, collar: float) -> Timeline:
    if collar <= 0:
        return Timeline()
    out = []
    for seg, _ in ref.turns:
        for t in (seg.onset, seg.offset):
            lo = max(0.0, t - collar)
            hi = t + collar
            if hi > lo:
                out.append(Segment(lo, hi))
    return Timeline(out)


def _atomic_pieces(ref: Diarization, hyp: Diarization, collar: float):
    """Scored atomic intervals with the active label sets on each side."""
    cuts = {0.0}
    for d in (ref, hyp):
        for seg, _ in d.turns:
            cuts.add(seg.onset)
            cuts.add(seg.offset)
    excluded = _collar_timeline(ref, collar)
    for seg in excluded:
        cuts.add(seg.onset)
        cuts.add(seg.offset)
    points = sorted(cuts)
    ref_tls = {lab: ref.label_timeline(lab) for lab in ref.labels()}
    hyp_tls = {lab: hyp.label_timeline(lab) for lab in hyp.labels()}
    pieces = []
    for a, b in zip(points, points[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        if excluded.covers(mid):
            continue
        ractive = frozenset(l for l, tl in ref_tls.items() if tl.covers(mid))
        hactive = frozenset(l for l, tl in hyp_tls.items() if tl.covers(mid))
        if ractive or hactive:
            pieces.append((b - a, ractive, hactive))
    return pieces


def _optimal_mapping(
    ref: Diarization, hyp: Diarization, collar: float
) -> dict[str, str]:
    """Exact max-total-overlap one-to-one label mapping on scored regions."""
    rlabels = list(ref.labels())
    hlabels = list(hyp.labels())
    if not rlabels or not hlabels:
        return {}
    overlap = np.zeros((len(rlabels), len(hlabels)))
    rindex = {l: i for i, l in enumerate(rlabels)}
    hindex = {l: i for i, l in enumerate(hlabels)}
    for dur, ractive, hactive in _atomic_pieces(ref, hyp, collar):
        for rl in ractive:
            for hl in hactive:
                overlap[rindex[rl], hindex[hl]] += dur
    rows, cols = linear_sum_assignment(-overlap)
    return {
        rlabels[r]: hlabels[c]
        for r, c in zip(rows, cols)
        if overlap[r, c] > 0  # zero-overlap pairs stay unmapped
    }


def der(ref: Diarization, hyp: Diarization, collar: float = 0.25) -> DerBreakdown:
    """Diarization error rate with boundary collars; overlap is scored.

    At each scored instant: miss = max(0, ref_count - hyp_count), false
    alarm = max(0, hyp_count - ref_count), confusion = min(ref_count,
    hyp_count) minus the number of correctly mapped active speakers.
    Total is reference speech time with overlap counted multiply.
    """
    if ref.recording_id != hyp.recording_id:
        raise ValueError(
            f"recording mismatch: {ref.recording_id!r} vs {hyp.recording_id!r}"
        )
    mapping = _optimal_mapping(ref, hyp, collar)
    total = miss = fa = conf = 0.0
    for dur, ractive, hactive in _atomic_pieces(ref, hyp, collar):
        r, h = len(ractive), len(hactive)
        correct = sum(1 for rl in ractive if mapping.get(rl) in hactive)
        total += r * dur
        miss += max(0, r - h) * dur
        fa += max(0, h - r) * dur
        conf += (min(r, h) - min(correct, min(r, h))) * dur
    return DerBreakdown(total, miss, fa, conf)


def jer(ref: Diarization, hyp: Diarization) -> float:
    """Jaccard error rate: mean over reference speakers of
    1 - |s ∩ m| / |s ∪ m| under the collar-0 optimal mapping;
    unmapped reference speakers score 1."""
    if ref.recording_id != hyp.recording_id:
        raise ValueError(
            f"recording mismatch: {ref.recording_id!r} vs {hyp.recording_id!r}"
        )
    rlabels = ref.labels()
    if not rlabels:
        return 0.0
    mapping = _optimal_mapping(ref, hyp, collar=0.0)
    scores = []
    for rl in rlabels:
        hl = mapping.get(rl)
        if hl is None:
            scores.append(1.0)
            continue
        rtl = ref.label_timeline(rl)
        htl = hyp.label_timeline(hl)
        inter = rtl.intersect(htl).duration()
        union = rtl.duration() + htl.duration() - inter
        scores.append(1.0 - inter / union if union > 0 else 0.0)
    return float(np.mean(scores))


def _frame_activity(t: Timeline, n_frames: int) -> np.ndarray:
    """Frame active iff its midpoint lies inside the timeline."""
    mids = (np.arange(n_frames) + 0.5) * FRAME
    bounds = np.array(
        [x for seg in t for x in (seg.onset, seg.offset)], dtype=np.float64
    )
    if bounds.size == 0:
        return np.zeros(n_frames, dtype=bool)
    return np.searchsorted(bounds, mids, side="right") % 2 == 1


def vad_error(
    ref: Timeline, hyp: Timeline, total: float
) -> tuple[float, float, float]:
    """Frame-level VAD error at 10 ms resolution, in percent of total.

    Returns (miss%, fa%, error%) where error = miss + fa; the denominator
    is the total recording duration, so miss and false alarm add up to
    the reported error.
    """
    if total <= 0:
        raise ValueError(f"total duration must be > 0, got {total}")
    n_frames = int(round(total / FRAME))
    if n_frames < 1:
        raise ValueError("total duration shorter than one frame")
    r = _frame_activity(ref, n_frames)
    h = _frame_activity(hyp, n_frames)
    miss = float(np.count_nonzero(r & ~h)) / n_frames * 100.0
    fa = float(np.count_nonzero(~r & h)) / n_frames * 100.0
    return miss, fa, miss + fa


def eer(scores: list[tuple[float, bool]]) -> float:
    """Equal error rate with linear interpolation between ROC points.

    `scores` holds (score, is_target) pairs; accept means score >=
    threshold. Invariant under any strictly increasing score transform.
    """
    targets = np.sort(np.array([s for s, t in scores if t], dtype=np.float64))
    nontargets = np.sort(np.array([s for s, t in scores if not t], dtype=np.float64))
    if targets.size == 0 or nontargets.size == 0:
        raise ValueError("need at least one target and one non-target score")
    thresholds = np.unique(np.concatenate([targets, nontargets]))
    prev_fa = prev_fr = None
    for theta in list(thresholds) + [float(thresholds[-1]) + 1.0]:
        fa = float(np.count_nonzero(nontargets >= theta)) / nontargets.size
        fr = float(np.count_nonzero(targets < theta)) / targets.size
        if fr >= fa:
            if fr == fa or prev_fa is None:
                return fa if fr == fa else fr
            denom = (fr - prev_fr) - (fa - prev_fa)
            s = (prev_fa - prev_fr) / denom if denom != 0 else 0.0
            return prev_fa + s * (fa - prev_fa)
        prev_fa, prev_fr = fa, fr
    return prev_fa  # unreachable: the sentinel threshold rejects everything


def as_norm(
    raw: float,
    enroll_cohort: list[float],
    test_cohort: list[float],
    top_k: int = 300,
) -> float:
    """Adaptive score normalization against the top-k cohort scores.

    Each side standardizes the raw score with the mean and population
    standard deviation of its top-k highest cohort scores; the result is
    the average of the two standardized values.
    """
    if top_k < 2:
        raise ValueError(f"top_k must be >= 2, got {top_k}")
    if not enroll_cohort or not test_cohort:
        raise ValueError("cohorts must be non-empty")

    def standardize(cohort: list[float]) -> float:
        top = np.sort(np.array(cohort, dtype=np.float64))[::-1][:top_k]
        mu = float(np.mean(top))
        sigma = float(np.std(top))
        if sigma < 1e-12:
            raise ValueError("degenerate cohort: zero variance in top-k scores")
        return (raw - mu) / sigma

    return 0.5 * (standardize(enroll_cohort) + standardize(test_cohort))


def speaker_count_stats(
    pairs: list[tuple[int, int]]
) -> tuple[float, float, float]:
    """Percent of (estimated, true) pairs that are exact, under, and over."""
    if not pairs:
        raise ValueError("no speaker-count pairs")
    n = len(pairs)
    correct = sum(1 for est, true in pairs if est == true)
    under = sum(1 for est, true in pairs if est < true)
    over = n - correct - under
    return 100.0 * correct / n, 100.0 * under / n, 100.0 * over / n


@dataclass(frozen=True)
class PieceRef:
    """A cut of one speaker's concatenated (overlap-free) speech.

    Offsets index into the concatenation, not the original recording.
    """

    recording_id: str
    speaker: str
    piece: Segment

    def key(self) -> str:
        return (
            f"{self.recording_id}:{self.speaker}"
            f":{self.piece.onset:.3f}-{self.piece.offset:.3f}"
        )


@dataclass(frozen=True)
class TrialPair:
    enroll: PieceRef
    test: PieceRef
    target: bool


@dataclass(frozen=True)
class TrialSet:
    trials: tuple[TrialPair, ...]
    requested: int
    truncated: bool  # availability capped the requested count


def _cut_pieces(
    rng: np.random.Generator, rec: str, speaker: str, duration: float
) -> list[PieceRef]:
    pieces = []
    pos = 0.0
    while duration - pos >= 1.0:
        length = min(float(rng.uniform(1.0, 5.0)), duration - pos)
        pieces.append(PieceRef(rec, speaker, Segment(pos, pos + length)))
        pos += length
    return pieces


def make_trials(
    refs: dict[str, Diarization], seed: int, count: int = 100_000
) -> TrialSet:
    """Build a balanced verification trial list from reference diarizations.

    Per speaker, the overlap-free speech is concatenated and cut into
    pieces of 1 to 5 seconds (sub-second remainders dropped). Pairs are
    sampled without replacement, exactly half target and half non-target;
    when the requested count is unreachable the maximum balanced count is
    returned with the truncated flag set.
    """
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    rng = np.random.default_rng(seed)
    pieces: list[PieceRef] = []
    speaker_pieces: list[list[int]] = []
    for rec in sorted(refs):
        d = refs[rec]
        overlap = d.concurrency(2)
        for speaker in d.labels():
            solo = d.label_timeline(speaker).subtract(overlap)
            cut = _cut_pieces(rng, rec, speaker, solo.duration())
            if cut:
                idx0 = len(pieces)
                pieces.extend(cut)
                speaker_pieces.append(list(range(idx0, idx0 + len(cut))))
    n_pieces = len(pieces)
    speakers_total = len(speaker_pieces)
    if speakers_total < 2:
        raise ValueError("need speech from at least two speakers")

    max_targets = sum(len(g) * (len(g) - 1) // 2 for g in speaker_pieces)
    sq = sum(len(g) ** 2 for g in speaker_pieces)
    max_nontargets = (n_pieces * n_pieces - sq) // 2
    need = min(count // 2, max_targets, max_nontargets)
    if need < 1:
        raise ValueError("no balanced trial pairs available")
    truncated = need < count // 2

    target_pool = [
        (g[i], g[j])
        for g in speaker_pieces
        for i in range(len(g))
        for j in range(i + 1, len(g))
    ]
    chosen_t = rng.choice(len(target_pool), size=need, replace=False)
    trials = [
        TrialPair(pieces[target_pool[i][0]], pieces[target_pool[i][1]], True)
        for i in chosen_t
    ]

    speaker_of = np.empty(n_pieces, dtype=np.intp)
    for s, g in enumerate(speaker_pieces):
        for i in g:
            speaker_of[i] = s
    if max_nontargets <= 4 * need:
        pool = [
            (i, j)
            for i in range(n_pieces)
            for j in range(i + 1, n_pieces)
            if speaker_of[i] != speaker_of[j]
        ]
        chosen_n = rng.choice(len(pool), size=need, replace=False)
        nontargets = [pool[i] for i in chosen_n]
    else:
        seen: set[tuple[int, int]] = set()
        nontargets = []
        while len(nontargets) < need:
            i = int(rng.integers(n_pieces))
            j = int(rng.integers(n_pieces))
            if i == j or speaker_of[i] == speaker_of[j]:
                continue
            pair = (min(i, j), max(i, j))
            if pair in seen:
                continue
            seen.add(pair)
            nontargets.append(pair)
    trials.extend(TrialPair(pieces[i], pieces[j], False) for i, j in nontargets)
    order = rng.permutation(len(trials))
    return TrialSet(tuple(trials[i] for i in order), count, truncated)
