"""Time-interval algebra and the diarization data model.

All intervals are half-open ``[onset, offset)`` in seconds, which keeps
shared boundaries from being counted twice anywhere downstream.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Iterator

# Slop for float boundary comparisons; far below the 1 ms file precision.
EPS = 1e-9


@dataclass(frozen=True, order=True)
class Segment:
    """A half-open time interval [onset, offset) in seconds."""

    onset: float
    offset: float

    def __post_init__(self):
        if not (0.0 <= self.onset < self.offset):
            raise ValueError(
                f"invalid segment [{self.onset}, {self.offset}): "
                "need 0 <= onset < offset"
            )

    @property
    def duration(self) -> float:
        return self.offset - self.onset

    @property
    def middle(self) -> float:
        return 0.5 * (self.onset + self.offset)

    def intersects(self, other: "Segment") -> bool:
        return self.onset < other.offset and other.onset < self.offset

    def overlap(self, other: "Segment") -> float:
        """Length of the intersection with `other` (0 if disjoint)."""
        lo = max(self.onset, other.onset)
        hi = min(self.offset, other.offset)
        return max(0.0, hi - lo)


@dataclass(frozen=True)
class ScaleConfig:
    """A (window, hop) pair for uniform segmentation, in seconds."""

    window: float
    hop: float

    def __post_init__(self):
        if not (0.0 < self.hop <= self.window):
            raise ValueError(f"invalid scale: need 0 < hop <= window, got {self}")

    @property
    def key(self) -> str:
        """Compact name used in file names, e.g. ``1x0.25``."""
        return f"{self.window:g}x{self.hop:g}"


class Timeline:
    """An ordered set of non-overlapping segments (canonical form).

    Construction merges overlapping and adjacent input segments, so a
    Timeline always satisfies: sorted by onset, pairwise disjoint, no
    zero-length segments.
    """

    __slots__ = ("_segments", "_bounds")

    def __init__(self, segments: Iterable[Segment] = ()):
        merged: list[list[float]] = []
        for seg in sorted(segments, key=lambda s: (s.onset, s.offset)):
            if merged and seg.onset <= merged[-1][1] + EPS:
                merged[-1][1] = max(merged[-1][1], seg.offset)
            else:
                merged.append([seg.onset, seg.offset])
        self._segments = tuple(Segment(a, b) for a, b in merged)
        # flattened boundaries for O(log n) point queries
        self._bounds = [x for s in self._segments for x in (s.onset, s.offset)]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "Timeline":
        return cls(Segment(a, b) for a, b in pairs)

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self._segments

    def __iter__(self) -> Iterator[Segment]:
        return iter(self._segments)

    def __len__(self) -> int:
        return len(self._segments)

    def __bool__(self) -> bool:
        return bool(self._segments)

    def __eq__(self, other) -> bool:
        return isinstance(other, Timeline) and self._segments == other._segments

    def __hash__(self) -> int:
        return hash(self._segments)

    def __repr__(self) -> str:
        inner = ", ".join(f"[{s.onset:g},{s.offset:g})" for s in self._segments)
        return f"Timeline({inner})"

    def duration(self) -> float:
        """Total measure of the timeline."""
        return sum(s.duration for s in self._segments)

    def extent(self) -> Segment | None:
        if not self._segments:
            return None
        return Segment(self._segments[0].onset, self._segments[-1].offset)

    def covers(self, t: float) -> bool:
        """True if the instant `t` lies inside a segment (half-open)."""
        i = bisect.bisect_right(self._bounds, t)
        return i % 2 == 1

    def union(self, other: "Timeline") -> "Timeline":
        return Timeline(list(self._segments) + list(other._segments))

    def intersect(self, other: "Timeline") -> "Timeline":
        out = []
        j = 0
        for a in self._segments:
            while j < len(other._segments) and other._segments[j].offset <= a.onset:
                j += 1
            k = j
            while k < len(other._segments) and other._segments[k].onset < a.offset:
                b = other._segments[k]
                lo, hi = max(a.onset, b.onset), min(a.offset, b.offset)
                if hi > lo:
                    out.append(Segment(lo, hi))
                k += 1
        return Timeline(out)

    def subtract(self, other: "Timeline") -> "Timeline":
        out = []
        for a in self._segments:
            cursor = a.onset
            for b in other._segments:
                if b.offset <= cursor or b.onset >= a.offset:
                    continue
                if b.onset > cursor:
                    out.append(Segment(cursor, b.onset))
                cursor = max(cursor, b.offset)
                if cursor >= a.offset:
                    break
            if cursor < a.offset - EPS:
                out.append(Segment(cursor, a.offset))
        return Timeline(out)

    def gaps(self) -> "Timeline":
        """Intervals between consecutive segments."""
        out = []
        for prev, nxt in zip(self._segments, self._segments[1:]):
            if nxt.onset > prev.offset + EPS:
                out.append(Segment(prev.offset, nxt.onset))
        return Timeline(out)

    def crop(self, window: Segment) -> "Timeline":
        return self.intersect(Timeline([window]))


class Diarization:
    """A recording id plus labeled turns; overlap across labels allowed.

    Turns are normalized on construction: same-label turns that overlap or
    touch are merged, and the result is sorted by (onset, offset, label).
    """

    __slots__ = ("recording_id", "turns", "_by_label")

    def __init__(self, recording_id: str, turns: Iterable[tuple[Segment, str]] = ()):
        self.recording_id = recording_id
        by_label: dict[str, list[Segment]] = {}
        for seg, label in turns:
            if not label or any(ch.isspace() for ch in label):
                raise ValueError(f"invalid speaker label {label!r}")
            by_label.setdefault(label, []).append(seg)
        self._by_label = {lab: Timeline(segs) for lab, segs in by_label.items()}
        flat = [
            (seg, lab) for lab, tl in self._by_label.items() for seg in tl
        ]
        flat.sort(key=lambda t: (t[0].onset, t[0].offset, t[1]))
        self.turns = tuple(flat)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Diarization)
            and self.recording_id == other.recording_id
            and self.turns == other.turns
        )

    def __hash__(self) -> int:
        return hash((self.recording_id, self.turns))

    def __len__(self) -> int:
        return len(self.turns)

    def __bool__(self) -> bool:
        return bool(self.turns)

    def __repr__(self) -> str:
        return f"Diarization({self.recording_id!r}, {len(self.turns)} turns)"

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_label))

    def label_timeline(self, label: str) -> Timeline:
        return self._by_label.get(label, Timeline())

    def speech(self) -> Timeline:
        """Union of all turns, regardless of label."""
        return Timeline(seg for seg, _ in self.turns)

    def concurrency(self, min_count: int = 2) -> Timeline:
        """Regions where at least `min_count` labels are simultaneously active."""
        events: list[tuple[float, int]] = []
        for seg, _ in self.turns:
            events.append((seg.onset, 1))
            events.append((seg.offset, -1))
        events.sort()
        out, depth, start = [], 0, None
        for t, d in events:
            depth += d
            if depth >= min_count and start is None:
                start = t
            elif depth < min_count and start is not None:
                if t > start:
                    out.append(Segment(start, t))
                start = None
        return Timeline(out)

    def relabeled(self, mapping: dict[str, str]) -> "Diarization":
        return Diarization(
            self.recording_id,
            [(seg, mapping.get(lab, lab)) for seg, lab in self.turns],
        )


def uniform_segmentation(speech: Timeline, scale: ScaleConfig) -> list[Segment]:
    """Slide fixed windows over each speech region.

    Within a region [a, b): regular windows start at a, a+hop, ... while
    they fit; a region shorter than the window yields itself; otherwise a
    final window [b-window, b) is added when the last regular window stops
    short of b, so the region is always fully covered at full window
    length.
    """
    out: list[Segment] = []
    w, h = scale.window, scale.hop
    for region in speech:
        a, b = region.onset, region.offset
        if b - a < w - EPS:
            out.append(Segment(a, b))
            continue
        last_end = a
        i = 0
        while a + i * h + w <= b + EPS:
            start = a + i * h
            end = min(start + w, b)  # EPS slack must not overshoot the region
            out.append(Segment(start, end))
            last_end = end
            i += 1
        if last_end < b - EPS:
            out.append(Segment(max(b - w, a), b))
    return out


def vad_postprocess(
    t: Timeline, min_duration_on: float = 0.182, min_duration_off: float = 0.501
) -> Timeline:
    """Fill short gaps, then drop short regions.

    Gaps strictly shorter than `min_duration_off` are filled first, then
    resulting regions strictly shorter than `min_duration_on` are removed.
    Doing it in this order never removes a long region that was split by
    micro-gaps. Defaults are typical tunings for neural VAD
    post-processing.
    """
    if min_duration_on < 0 or min_duration_off < 0:
        raise ValueError("duration thresholds must be >= 0")
    filled: list[list[float]] = []
    for seg in t:
        if filled and seg.onset - filled[-1][1] < min_duration_off:
            filled[-1][1] = max(filled[-1][1], seg.offset)
        else:
            filled.append([seg.onset, seg.offset])
    kept = [Segment(a, b) for a, b in filled if b - a >= min_duration_on]
    return Timeline(kept)


def windows_to_turns(
    recording_id: str, segments: list[Segment], labels: list[str]
) -> Diarization:
    """Convert labeled windows back into speaker turns.

    Windows are grouped into speech regions (consecutive windows that
    overlap or touch). Within a region the boundary between two adjacent
    windows with different labels is the midpoint of their centers; the
    first label starts at the region start and the last ends at the region
    end. Adjacent same-label turns merge via Diarization normalization.
    """
    if len(segments) != len(labels):
        raise ValueError(
            f"{len(segments)} windows but {len(labels)} labels for {recording_id}"
        )
    turns: list[tuple[Segment, str]] = []
    i = 0
    n = len(segments)
    while i < n:
        # collect one region of overlapping/touching windows
        j = i + 1
        while j < n and segments[j].onset <= segments[j - 1].offset + EPS:
            j += 1
        region = segments[i:j]
        region_labels = labels[i:j]
        start = region[0].onset
        for k in range(len(region)):
            if k + 1 < len(region):
                if region_labels[k + 1] == region_labels[k]:
                    continue
                end = 0.5 * (region[k].middle + region[k + 1].middle)
            else:
                end = region[-1].offset
            if end > start:
                turns.append((Segment(start, end), region_labels[k]))
            start = end
        i = j
    return Diarization(recording_id, turns)
