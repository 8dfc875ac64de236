"""RTTM and LAB file reading/writing.

RTTM lines: ``SPEAKER <rec> 1 <onset> <dur> <NA> <NA> <label> <NA> <NA>``,
onset/duration printed with exactly 3 decimals. LAB lines:
``<onset> <offset> <tag>``. Both formats are UTF-8 with ``\\n`` endings.
"""

from __future__ import annotations

from .timeline import Diarization, Segment, Timeline


class ParseError(ValueError):
    """A malformed input line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def _parse_float(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(line_no, f"non-numeric {what}: {text!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ParseError(line_no, f"non-finite {what}: {text!r}")
    return value


def parse_rttm(text: str) -> dict[str, Diarization]:
    """Parse RTTM text into one Diarization per recording id."""
    turns: dict[str, list[tuple[Segment, str]]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 10:
            raise ParseError(line_no, f"expected 10 fields, got {len(fields)}")
        if fields[0] != "SPEAKER":
            raise ParseError(line_no, f"expected SPEAKER record, got {fields[0]!r}")
        onset = _parse_float(fields[3], line_no, "onset")
        dur = _parse_float(fields[4], line_no, "duration")
        if dur <= 0:
            raise ParseError(line_no, f"duration must be > 0, got {dur}")
        if onset < 0:
            raise ParseError(line_no, f"onset must be >= 0, got {onset}")
        turns.setdefault(fields[1], []).append(
            (Segment(onset, onset + dur), fields[7])
        )
    return {rec: Diarization(rec, t) for rec, t in turns.items()}


def emit_rttm(d: Diarization) -> str:
    """Serialize one Diarization; turns sorted by (onset, label)."""
    lines = []
    for seg, label in sorted(d.turns, key=lambda t: (t[0].onset, t[1])):
        lines.append(
            f"SPEAKER {d.recording_id} 1 {seg.onset:.3f} {seg.duration:.3f} "
            f"<NA> <NA> {label} <NA> <NA>"
        )
    return "".join(line + "\n" for line in lines)


def emit_rttm_all(diarizations: dict[str, Diarization]) -> str:
    return "".join(emit_rttm(diarizations[rec]) for rec in sorted(diarizations))


def parse_lab(text: str, tag: str = "speech") -> Timeline:
    """Parse LAB text, keeping intervals carrying `tag`.

    Every line is validated; lines with other tags are then ignored.
    Overlapping and adjacent intervals merge into canonical form.
    """
    segments = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(fields)}")
        onset = _parse_float(fields[0], line_no, "onset")
        offset = _parse_float(fields[1], line_no, "offset")
        if offset <= onset:
            raise ParseError(
                line_no, f"offset must exceed onset, got [{onset}, {offset})"
            )
        if onset < 0:
            raise ParseError(line_no, f"onset must be >= 0, got {onset}")
        if fields[2] == tag:
            segments.append(Segment(onset, offset))
    return Timeline(segments)


def emit_lab(t: Timeline, tag: str) -> str:
    return "".join(f"{s.onset:.3f} {s.offset:.3f} {tag}\n" for s in t)
