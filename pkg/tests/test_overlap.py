import pytest

from diarkit.overlap import OverlapPolicy, assign_overlaps
from diarkit.timeline import Diarization, Segment, Timeline


def D(*turns):
    return Diarization("rec", [(Segment(a, b), lab) for a, b, lab in turns])


SPEECH = Timeline([Segment(0.0, 60.0)])


class TestAssignOverlaps:
    def test_boundary_straddling_region_gets_both(self):
        d = D((0, 5, "A"), (5, 10, "B"))
        out = assign_overlaps(d, Timeline([Segment(4.5, 5.5)]), SPEECH)
        for lab in ("A", "B"):
            tl = out.label_timeline(lab)
            assert tl.covers(4.6) and tl.covers(5.4)

    def test_single_speaker_unchanged(self):
        d = D((0, 10, "A"))
        out = assign_overlaps(d, Timeline([Segment(3, 4)]), SPEECH)
        assert out == d

    def test_already_two_labels_unchanged(self):
        d = D((0, 6, "A"), (2, 8, "B"))
        out = assign_overlaps(d, Timeline([Segment(3, 4)]), SPEECH)
        assert out == d

    def test_osd_cropped_to_speech(self):
        d = D((0, 5, "A"), (5, 10, "B"))
        speech = Timeline([Segment(0, 10)])
        out = assign_overlaps(d, Timeline([Segment(9, 12)]), speech)
        # only [9, 10) is inside speech; B is incumbent, A is added there
        assert out.label_timeline("A").covers(9.5)
        assert not out.label_timeline("A").covers(10.5)

    def test_non_overlap_regions_untouched(self):
        d = D((0, 5, "A"), (6, 9, "B"), (10, 15, "C"))
        osd = Timeline([Segment(4.5, 5.0)])
        out = assign_overlaps(d, osd, SPEECH)
        before = {lab: d.label_timeline(lab) for lab in d.labels()}
        after = {lab: out.label_timeline(lab) for lab in out.labels()}
        for lab in before:
            outside_before = before[lab].subtract(osd)
            outside_after = after[lab].subtract(osd)
            assert outside_before == outside_after

    def test_never_more_than_two_labels(self):
        d = D((0, 4, "A"), (3, 7, "B"), (6, 10, "C"))
        osd = Timeline([Segment(2.0, 8.0)])
        out = assign_overlaps(d, osd, SPEECH)
        assert out.concurrency(3) == Timeline()

    def test_never_invents_labels(self):
        d = D((0, 5, "A"), (5, 10, "B"))
        out = assign_overlaps(d, Timeline([Segment(2, 3), Segment(7, 8)]), SPEECH)
        assert set(out.labels()) == {"A", "B"}

    def test_tie_prefers_preceding(self):
        # piece [5, 6) has incumbent C; A ends at 5 and B starts at 6: tie
        d = D((0, 5, "A"), (5, 10, "C"), (6, 11, "B"))
        out = assign_overlaps(d, Timeline([Segment(5.0, 6.0)]), SPEECH)
        assert out.label_timeline("A").covers(5.5)
        assert not out.label_timeline("B").covers(5.5)

    def test_horizon_limits_search(self):
        d = D((0, 1, "A"), (30, 40, "B"))
        osd = Timeline([Segment(32, 33)])
        out = assign_overlaps(d, osd, SPEECH, OverlapPolicy(search_horizon=5.0))
        assert out == d  # A is 29 s away, beyond the horizon

    def test_osd_outside_speech_ignored(self):
        d = D((0, 5, "A"), (5, 10, "B"))
        out = assign_overlaps(
            d, Timeline([Segment(20, 21)]), Timeline([Segment(0, 10)])
        )
        assert out == d

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            OverlapPolicy(max_simultaneous=3)
