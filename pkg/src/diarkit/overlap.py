"""Second-speaker assignment inside detected overlap regions.

Overlapped speech is assumed to hold at most two voices. Detected overlap
regions are cropped to speech, split at the diarization's turn
boundaries, and each resulting piece that carries fewer than two labels
gains the label of the nearest turn (in time, looking both ways) with a
label it does not already have. A piece straddling nothing changes; ties
between an equally close preceding and following turn go to the
preceding speaker, since speech tends to trail off rather than
anticipate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .timeline import Diarization, Segment, Timeline


@dataclass(frozen=True)
class OverlapPolicy:
    """Assignment limits: at most two simultaneous speakers, and an
    optional cap on how far away (seconds) a donor turn may be."""

    max_simultaneous: int = 2
    search_horizon: float = math.inf

    def __post_init__(self):
        if self.max_simultaneous != 2:
            raise ValueError("only two simultaneous speakers are supported")
        if self.search_horizon <= 0:
            raise ValueError("search_horizon must be > 0")


def _pieces(region: Segment, d: Diarization) -> list[Segment]:
    """Split an overlap region at every turn boundary inside it."""
    cuts = {region.onset, region.offset}
    for seg, _ in d.turns:
        for t in (seg.onset, seg.offset):
            if region.onset < t < region.offset:
                cuts.add(t)
    points = sorted(cuts)
    return [
        Segment(a, b) for a, b in zip(points, points[1:]) if b > a
    ]


def _nearest_other_label(
    d: Diarization, piece: Segment, exclude: set[str], horizon: float
) -> str | None:
    """Closest-in-time turn label not in `exclude`; ties prefer preceding."""
    best: tuple[float, int, str] | None = None
    for seg, label in d.turns:
        if label in exclude:
            continue
        if seg.offset <= piece.onset:
            dist, direction = piece.onset - seg.offset, 0  # preceding
        elif seg.onset >= piece.offset:
            dist, direction = seg.onset - piece.offset, 1  # following
        else:
            dist, direction = 0.0, 0
        if dist > horizon:
            continue
        key = (dist, direction, label)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def assign_overlaps(
    d: Diarization,
    osd: Timeline,
    speech: Timeline,
    policy: OverlapPolicy = OverlapPolicy(),
) -> Diarization:
    """Add the nearest other speaker inside each overlap region.

    Input diarization is expected to be single-speaker coverage (the
    clustering output); regions already carrying two labels are left
    alone, and no speaker is ever invented.
    """
    additions: list[tuple[Segment, str]] = []
    label_timelines = {lab: d.label_timeline(lab) for lab in d.labels()}
    for region in osd.intersect(speech):
        for piece in _pieces(region, d):
            mid = piece.middle
            active = {
                lab for lab, tl in label_timelines.items() if tl.covers(mid)
            }
            if len(active) >= policy.max_simultaneous:
                continue
            donor = _nearest_other_label(d, piece, active, policy.search_horizon)
            if donor is not None:
                additions.append((piece, donor))
    if not additions:
        return d
    return Diarization(d.recording_id, list(d.turns) + additions)
