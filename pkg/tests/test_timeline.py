import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diarkit.timeline import (
    Diarization,
    ScaleConfig,
    Segment,
    Timeline,
    uniform_segmentation,
    vad_postprocess,
    windows_to_turns,
)


def TL(*pairs):
    return Timeline.from_pairs(pairs)


def assert_segments_close(got, expected, tol=1e-9):
    assert len(got) == len(expected)
    for g, e in zip(got, expected):
        assert abs(g.onset - e.onset) < tol and abs(g.offset - e.offset) < tol


class TestSegment:
    def test_valid(self):
        s = Segment(0.5, 1.75)
        assert s.duration == pytest.approx(1.25)
        assert s.middle == pytest.approx(1.125)

    @pytest.mark.parametrize("onset,offset", [(1.0, 1.0), (2.0, 1.0), (-0.1, 1.0)])
    def test_invalid(self, onset, offset):
        with pytest.raises(ValueError):
            Segment(onset, offset)


class TestTimeline:
    def test_merges_overlapping_and_adjacent(self):
        t = TL((0.0, 1.0), (0.8, 2.0), (2.0, 3.0), (5.0, 6.0))
        assert t.segments == (Segment(0.0, 3.0), Segment(5.0, 6.0))

    def test_set_operations(self):
        a = TL((0.0, 4.0), (6.0, 8.0))
        b = TL((3.0, 7.0))
        assert a.intersect(b) == TL((3.0, 4.0), (6.0, 7.0))
        assert a.subtract(b) == TL((0.0, 3.0), (7.0, 8.0))
        assert a.union(b) == TL((0.0, 8.0))
        assert a.gaps() == TL((4.0, 6.0))

    def test_covers_half_open(self):
        t = TL((1.0, 2.0))
        assert t.covers(1.0)
        assert not t.covers(2.0)
        assert not t.covers(0.5)

    def test_duration(self):
        assert TL((0, 1), (2, 4)).duration() == pytest.approx(3.0)

    @given(
        st.lists(
            st.tuples(
                st.floats(0, 50, allow_nan=False), st.floats(0.01, 5, allow_nan=False)
            ),
            max_size=30,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_canonical_form_preserves_union(self, raw):
        segs = [Segment(on, on + dur) for on, dur in raw]
        t = Timeline(segs)
        # sorted, disjoint
        for prev, nxt in zip(t.segments, t.segments[1:]):
            assert prev.offset < nxt.onset
        # union preserved, checked by 10 ms point sampling
        for x in np.arange(0.005, 56.0, 0.01):
            in_raw = any(s.onset <= x < s.offset for s in segs)
            if in_raw != t.covers(x):
                # only boundary-adjacent points may disagree (merge slop)
                assert min(abs(x - b) for s in segs for b in (s.onset, s.offset)) < 0.011


class TestUniformSegmentation:
    def test_exact_fit(self):
        windows = uniform_segmentation(TL((0, 3.0)), ScaleConfig(1.5, 0.75))
        assert windows == [Segment(0, 1.5), Segment(0.75, 2.25), Segment(1.5, 3.0)]

    def test_short_region(self):
        assert uniform_segmentation(TL((0, 0.8)), ScaleConfig(1.5, 0.75)) == [
            Segment(0, 0.8)
        ]

    def test_tail_window(self):
        windows = uniform_segmentation(TL((0, 1.9)), ScaleConfig(1.0, 0.5))
        assert_segments_close(
            windows, [Segment(0, 1.0), Segment(0.5, 1.5), Segment(0.9, 1.9)]
        )

    @given(
        st.lists(
            st.tuples(st.floats(0, 40, allow_nan=False), st.floats(0.05, 8, allow_nan=False)),
            min_size=1,
            max_size=8,
        ),
        st.sampled_from([(1.0, 0.25), (1.0, 0.5), (1.5, 0.75), (0.7, 0.7)]),
    )
    @settings(max_examples=150, deadline=None)
    def test_full_coverage(self, raw, scale):
        speech = Timeline(Segment(on, on + dur) for on, dur in raw)
        windows = uniform_segmentation(speech, ScaleConfig(*scale))
        assert Timeline(windows) == speech
        assert all(w.duration <= scale[0] + 1e-9 for w in windows)


class TestVadPostprocess:
    def test_fills_short_gap(self):
        t = TL((0, 1.0), (1.3, 2.0))
        assert vad_postprocess(t, 0.0, 0.501) == TL((0, 2.0))

    def test_removes_short_region(self):
        assert vad_postprocess(TL((0, 0.1)), 0.182, 0.0) == Timeline()

    def test_zero_thresholds_identity(self):
        t = TL((0, 1.0), (1.3, 2.0), (2.31, 2.4))
        assert vad_postprocess(t, 0.0, 0.0) == t

    def test_gap_fill_before_removal(self):
        # a long region split by a micro-gap survives intact
        t = TL((0, 0.15), (0.2, 0.35))
        assert vad_postprocess(t, 0.182, 0.1) == TL((0, 0.35))

    @given(
        st.lists(
            st.tuples(st.floats(0, 30, allow_nan=False), st.floats(0.05, 4, allow_nan=False)),
            max_size=12,
        ),
        st.floats(0, 1),
        st.floats(0, 1),
    )
    @settings(max_examples=150, deadline=None)
    def test_idempotent(self, raw, on_thr, off_thr):
        t = Timeline(Segment(on, on + dur) for on, dur in raw)
        once = vad_postprocess(t, on_thr, off_thr)
        assert vad_postprocess(once, on_thr, off_thr) == once


class TestWindowsToTurns:
    def test_merge_same_label(self):
        d = windows_to_turns(
            "rec", [Segment(0, 1.5), Segment(0.75, 2.25)], ["A", "A"]
        )
        assert d.turns == ((Segment(0, 2.25), "A"),)

    def test_midpoint_boundary(self):
        d = windows_to_turns(
            "rec", [Segment(0, 1.5), Segment(0.75, 2.25)], ["A", "B"]
        )
        assert d.turns == ((Segment(0, 1.125), "A"), (Segment(1.125, 2.25), "B"))

    def test_single_window(self):
        d = windows_to_turns("rec", [Segment(0, 1.0)], ["A"])
        assert d.turns == ((Segment(0, 1.0), "A"),)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            windows_to_turns("rec", [Segment(0, 1.0)], ["A", "B"])

    def test_separate_regions(self):
        d = windows_to_turns(
            "rec",
            [Segment(0, 1.0), Segment(3.0, 4.0)],
            ["A", "A"],
        )
        assert d.turns == ((Segment(0, 1.0), "A"), (Segment(3.0, 4.0), "A"))

    def test_output_covers_windows_exactly(self):
        rng = np.random.default_rng(5)
        speech = TL((0, 7.3), (9.0, 12.5))
        windows = uniform_segmentation(speech, ScaleConfig(1.0, 0.5))
        labels = [f"s{int(rng.integers(3))}" for _ in windows]
        d = windows_to_turns("rec", windows, labels)
        assert d.speech() == Timeline(windows)
        assert d.concurrency(2) == Timeline()


class TestDiarization:
    def test_normalization_merges_same_label(self):
        d = Diarization("r", [(Segment(0, 2), "A"), (Segment(1, 3), "A")])
        assert d.turns == ((Segment(0, 3), "A"),)

    def test_cross_label_overlap_allowed(self):
        d = Diarization("r", [(Segment(0, 2), "A"), (Segment(1, 3), "B")])
        assert len(d.turns) == 2
        assert d.concurrency(2) == TL((1, 2))

    def test_bad_label(self):
        with pytest.raises(ValueError):
            Diarization("r", [(Segment(0, 1), "a b")])
