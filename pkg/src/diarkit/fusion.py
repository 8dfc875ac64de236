"""Overlap-aware fusion of multiple diarization hypotheses.

Two stages: a global label mapping that greedily unifies labels across
hypotheses by co-occurrence duration (largest first, under the constraint
that two labels of one hypothesis never merge), then rank-weighted voting
over atomic regions that can emit several speakers per region. Global
label names derive from the group's temporal footprint, not from input
order, so equal-weight fusion is invariant to hypothesis permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .timeline import Diarization, Segment, Timeline


@dataclass(frozen=True)
class Hypothesis:
    diarization: Diarization
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class GlobalLabelMap:
    """Maps (hypothesis index, local label) to a shared global label."""

    assignment: dict[tuple[int, str], str]

    def apply(self, hyps: list[Hypothesis]) -> list[Hypothesis]:
        out = []
        for h, hyp in enumerate(hyps):
            mapping = {
                lab: self.assignment[(h, lab)] for lab in hyp.diarization.labels()
            }
            out.append(Hypothesis(hyp.diarization.relabeled(mapping), hyp.weight))
        return out


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _check_single_recording(hyps: list[Hypothesis]) -> str:
    if not hyps:
        raise ValueError("need at least one hypothesis")
    rec = hyps[0].diarization.recording_id
    for h in hyps[1:]:
        if h.diarization.recording_id != rec:
            raise ValueError(
                "hypotheses span different recordings: "
                f"{rec!r} vs {h.diarization.recording_id!r}"
            )
    return rec


def map_labels(hyps: list[Hypothesis]) -> GlobalLabelMap:
    """Greedy global label correspondence across hypotheses.

    Cross-hypothesis label pairs are sorted by co-occurrence duration
    (descending; ties by (hyp_i, label_i, hyp_j, label_j)) and merged
    with union-find unless the merge would put two labels of one
    hypothesis into the same group. Zero co-occurrence never merges.
    """
    _check_single_recording(hyps)
    nodes = []
    timelines: dict[tuple[int, str], Timeline] = {}
    for h, hyp in enumerate(hyps):
        for lab in hyp.diarization.labels():
            nodes.append((h, lab))
            timelines[(h, lab)] = hyp.diarization.label_timeline(lab)

    pairs = []
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if a[0] == b[0]:
                continue
            dur = timelines[a].intersect(timelines[b]).duration()
            if dur > 0:
                pairs.append((-dur, a[0], a[1], b[0], b[1]))
    pairs.sort()

    uf = _UnionFind(nodes)
    hyps_in_group: dict[tuple[int, str], set[int]] = {n: {n[0]} for n in nodes}
    for _, ha, la, hb, lb in pairs:
        ra, rb = uf.find((ha, la)), uf.find((hb, lb))
        if ra == rb:
            continue
        if hyps_in_group[ra] & hyps_in_group[rb]:
            continue  # would place two labels of one hypothesis together
        uf.union(ra, rb)
        root = uf.find(ra)
        hyps_in_group[root] = hyps_in_group[ra] | hyps_in_group[rb]

    groups: dict[tuple[int, str], list[tuple[int, str]]] = {}
    for node in nodes:
        groups.setdefault(uf.find(node), []).append(node)

    # order-free naming: sort groups by temporal footprint, then members
    def group_key(members):
        tl = Timeline()
        for m in members:
            tl = tl.union(timelines[m])
        onset = tl.extent().onset if tl else float("inf")
        return (onset, -tl.duration(), sorted(lab for _, lab in members))

    ordered = sorted(groups.values(), key=group_key)
    assignment = {}
    for gid, members in enumerate(ordered):
        name = f"spk{gid:02d}"
        for member in members:
            assignment[member] = name
    return GlobalLabelMap(assignment)


def fuse(hyps: list[Hypothesis]) -> Diarization:
    """Weighted overlap-aware voting over globally mapped hypotheses.

    The timeline is partitioned at every turn boundary; per region, each
    global label scores the summed weight of hypotheses asserting it and
    the emitted speaker count is the weighted mean of per-hypothesis
    counts, rounded half up. The top-scoring labels win (ties by label
    name). Scaling all weights together changes nothing.
    """
    rec = _check_single_recording(hyps)
    total_weight = sum(h.weight for h in hyps)
    if total_weight <= 0:
        raise ValueError("hypothesis weights must sum to > 0")
    mapped = map_labels(hyps).apply(hyps)

    boundaries = sorted(
        {
            t
            for hyp in mapped
            for seg, _ in hyp.diarization.turns
            for t in (seg.onset, seg.offset)
        }
    )
    label_timelines = [
        {
            lab: hyp.diarization.label_timeline(lab)
            for lab in hyp.diarization.labels()
        }
        for hyp in mapped
    ]

    turns: list[tuple[Segment, str]] = []
    for a, b in zip(boundaries, boundaries[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        scores: dict[str, float] = {}
        weighted_count = 0.0
        for hyp, tls in zip(mapped, label_timelines):
            asserted = [lab for lab, tl in tls.items() if tl.covers(mid)]
            weighted_count += hyp.weight * len(asserted)
            for lab in asserted:
                scores[lab] = scores.get(lab, 0.0) + hyp.weight
        n_out = int(weighted_count / total_weight + 0.5)  # round half up
        if n_out <= 0 or not scores:
            continue
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        for lab, _ in ranked[:n_out]:
            turns.append((Segment(a, b), lab))
    return Diarization(rec, turns)
