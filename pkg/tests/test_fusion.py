import itertools

import numpy as np
import pytest

from diarkit.fusion import Hypothesis, fuse, map_labels
from diarkit.timeline import Diarization, Segment, Timeline

from oracles import random_diarization


def D(rec, *turns):
    return Diarization(rec, [(Segment(a, b), lab) for a, b, lab in turns])


def same_content(a: Diarization, b: Diarization) -> bool:
    """Equal up to a bijective label renaming."""
    if a.labels() == b.labels():
        return a == b
    la, lb = a.labels(), b.labels()
    if len(la) != len(lb):
        return False
    for perm in itertools.permutations(lb):
        mapping = dict(zip(la, perm))
        if a.relabeled(mapping) == b:
            return True
    return False


class TestMapLabels:
    def test_cooccurring_labels_share_group(self):
        h1 = Hypothesis(D("r", (0, 5, "A")), 1.0)
        h2 = Hypothesis(D("r", (0, 5, "X")), 1.0)
        gmap = map_labels([h1, h2])
        assert gmap.assignment[(0, "A")] == gmap.assignment[(1, "X")]

    def test_disjoint_labels_stay_distinct(self):
        h1 = Hypothesis(D("r", (0, 5, "A")), 1.0)
        h2 = Hypothesis(D("r", (10, 15, "X")), 1.0)
        gmap = map_labels([h1, h2])
        assert gmap.assignment[(0, "A")] != gmap.assignment[(1, "X")]

    def test_same_hypothesis_labels_never_merge(self):
        h1 = Hypothesis(D("r", (0, 5, "A"), (0, 5, "B")), 1.0)
        h2 = Hypothesis(D("r", (0, 5, "X")), 1.0)
        gmap = map_labels([h1, h2])
        assert gmap.assignment[(0, "A")] != gmap.assignment[(0, "B")]

    def test_recovers_permuted_correspondence(self):
        # three hypotheses of the same 2-speaker structure, labels permuted
        base = [(0.0, 4.0, "s0"), (4.0, 8.0, "s1"), (8.0, 12.0, "s0")]
        perms = [{"s0": "a", "s1": "b"}, {"s0": "y", "s1": "x"}, {"s0": "q", "s1": "p"}]
        hyps = []
        for mapping in perms:
            turns = [(a, b, mapping[lab]) for a, b, lab in base]
            hyps.append(Hypothesis(D("r", *turns), 1.0))
        gmap = map_labels(hyps)
        # exhaustive check: the grouping with maximal total co-occurrence
        # pairs each hypothesis's image of s0 together, likewise s1
        g0 = {gmap.assignment[(i, perms[i]["s0"])] for i in range(3)}
        g1 = {gmap.assignment[(i, perms[i]["s1"])] for i in range(3)}
        assert len(g0) == 1 and len(g1) == 1
        assert g0 != g1


class TestFuse:
    def test_identical_copies_idempotent(self):
        d = D("r", (0, 4, "A"), (2, 6, "B"), (7, 9, "A"))
        hyps = [Hypothesis(d, w) for w in (0.4, 0.3, 0.3)]
        assert same_content(fuse(hyps), d)

    def test_majority_vote(self):
        h1 = Hypothesis(D("r", (0, 10, "A")), 0.4)
        h2 = Hypothesis(D("r", (20, 30, "B")), 0.3)
        h3 = Hypothesis(D("r", (20, 30, "C")), 0.3)
        # h2 and h3 co-occur, so B and C share a global label with score
        # 0.6 on [20, 30); A scores 0.4 on [0, 10). Counts: region 1 has
        # n = round(0.4) = 0, region 2 has n = round(0.6) = 1.
        fused = fuse([h1, h2, h3])
        assert len(fused.labels()) == 1
        assert fused.speech() == Timeline([Segment(20, 30)])

    def test_overlap_count_voting(self):
        # hyp1 asserts two speakers, hyps 2 and 3 assert one:
        # n = round((0.4 * 2 + 0.3 + 0.3) / 1.0) = round(1.4) = 1
        h1 = Hypothesis(D("r", (0, 10, "A"), (0, 10, "B")), 0.4)
        h2 = Hypothesis(D("r", (0, 10, "A")), 0.3)
        h3 = Hypothesis(D("r", (0, 10, "A")), 0.3)
        fused = fuse([h1, h2, h3])
        assert len(fused.labels()) == 1
        assert fused.speech() == Timeline([Segment(0, 10)])

    def test_weighted_vote_between_distinct_global_labels(self):
        # on [20, 30): hyp1 says A (weight 0.4), hyps 2 and 3 say C
        # (0.3 each); A is kept globally distinct from C because A already
        # merged with B on [0, 10) and C shares a hypothesis with B
        h1 = Hypothesis(D("r", (0, 10, "A"), (20, 30, "A")), 0.4)
        h2 = Hypothesis(D("r", (0, 10, "B"), (20, 30, "C")), 0.3)
        h3 = Hypothesis(D("r", (0, 10, "B"), (20, 30, "C")), 0.3)
        fused = fuse([h1, h2, h3])
        assert len(fused.turns) == 2
        (seg1, lab1), (seg2, lab2) = fused.turns
        assert (seg1, seg2) == (Segment(0, 10), Segment(20, 30))
        assert lab1 != lab2  # the 0.6-weight side wins the second region

    def test_minority_single_vs_majority(self):
        h1 = Hypothesis(D("r", (0, 10, "A")), 0.4)
        h2 = Hypothesis(D("r", (0, 10, "B"), (20, 25, "B")), 0.3)
        h3 = Hypothesis(D("r", (0, 10, "B"), (20, 25, "B")), 0.3)
        # on [0, 10): all three assert one speaker; A co-occurs with B,
        # but B also lives on [20, 25) where A is absent, so the mapping
        # still groups them; the fused output keeps one speaker per region
        fused = fuse([h1, h2, h3])
        assert len(fused.turns) == 2

    def test_permutation_invariance_equal_weights(self):
        rng = np.random.default_rng(33)
        ds = [random_diarization(rng, "r", max_speakers=3, max_turns=8) for _ in range(3)]
        hyps = [Hypothesis(d, 1.0) for d in ds]
        baseline = fuse(hyps)
        for perm in itertools.permutations(range(3)):
            shuffled = [hyps[i] for i in perm]
            assert fuse(shuffled) == baseline

    def test_weight_scaling_invariance(self):
        rng = np.random.default_rng(35)
        ds = [random_diarization(rng, "r", max_speakers=3, max_turns=10) for _ in range(3)]
        hyps = [Hypothesis(d, w) for d, w in zip(ds, (0.4, 0.3, 0.3))]
        scaled = [Hypothesis(d, w * 17.5) for d, w in zip(ds, (0.4, 0.3, 0.3))]
        assert fuse(hyps) == fuse(scaled)

    def test_output_labels_per_region_bounded(self):
        rng = np.random.default_rng(37)
        for trial in range(10):
            ds = [
                random_diarization(rng, "r", max_speakers=4, max_turns=10)
                for _ in range(3)
            ]
            hyps = [Hypothesis(d, w) for d, w in zip(ds, (0.4, 0.3, 0.3))]
            fused = fuse(hyps)
            max_in = max(
                (d.concurrency(i + 1) and i + 1)
                for d in ds
                for i in range(4)
                if d.concurrency(i + 1)
            )
            deepest = 0
            for depth in range(1, 6):
                if fused.concurrency(depth):
                    deepest = depth
            assert deepest <= max_in

    def test_single_hypothesis_identity(self):
        d = D("r", (0, 4, "A"), (2, 6, "B"))
        fused = fuse([Hypothesis(d, 1.0)])
        assert same_content(fused, d)

    def test_zero_weight_hypothesis_cannot_carry_a_region(self):
        h1 = Hypothesis(D("r", (0, 5, "A")), 1.0)
        h2 = Hypothesis(D("r", (10, 15, "B")), 0.0)
        fused = fuse([h1, h2])
        assert fused.speech() == Timeline([Segment(0, 5)])

    def test_empty_hypotheses(self):
        from diarkit.timeline import Diarization

        empty = Hypothesis(Diarization("r", []), 0.5)
        assert len(fuse([empty, empty]).turns) == 0
        # half the weight supports the region: n = round(0.5) = 1
        fused = fuse([Hypothesis(D("r", (0, 4, "A")), 0.5), empty])
        assert fused.speech() == Timeline([Segment(0, 4)])

    def test_all_zero_weights_rejected(self):
        d = D("r", (0, 5, "A"))
        with pytest.raises(ValueError):
            fuse([Hypothesis(d, 0.0), Hypothesis(d, 0.0)])

    def test_recording_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fuse([Hypothesis(D("r1", (0, 5, "A")), 1.0), Hypothesis(D("r2", (0, 5, "A")), 1.0)])
