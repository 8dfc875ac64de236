"""Synthetic embedding corpus with exact ground truth.

Stands in for a neural embedding extractor during testing: every stage of
the pipeline can be scored against generated references. Speaker
centroids are drawn uniformly on the unit sphere (rejection-sampled so no
pair exceeds cosine 0.5), window embeddings are noisy copies of the
active speaker's centroid, and windows inside overlap regions mix the two
active centroids. Generation is reproducible: each recording uses a
counter-based stream keyed by (seed, recording index), so recordings can
be produced independently and in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSet, emit_evec
from .fileio import emit_lab, emit_rttm
from .timeline import Diarization, ScaleConfig, Segment, Timeline, uniform_segmentation

DEFAULT_SCALES = (
    ScaleConfig(1.0, 0.25),
    ScaleConfig(1.0, 0.5),
    ScaleConfig(1.5, 0.75),
)

_MASK64 = 2**64 - 1
_NOISE_KEY = 0x9E3779B97F4A7C15  # separates structure and noise streams


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    """Corpus-level generation parameters.

    `target_speech` sizes each recording (turns are appended until the
    total speech reaches it), `speaker_balance` is the Dirichlet
    concentration of per-speaker time shares (lower = more uneven), and
    `gap_fraction`/`gap_length` control silences between turns.
    """

    recordings: int = 50
    speakers_per_recording: tuple[int, int] = (2, 8)
    dim: int = 32
    intra_spread: float = 0.08
    turn_length: tuple[float, float] = (1.5, 3.0)
    overlap_fraction: float = 0.15
    seed: int = 7
    target_speech: float = 60.0
    speaker_balance: float = 3.0
    gap_fraction: float = 0.35
    gap_length: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        lo, hi = self.speakers_per_recording
        if not (1 <= lo <= hi):
            raise ValueError(f"bad speakers_per_recording {self.speakers_per_recording}")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.intra_spread < 0:
            raise ValueError("intra_spread must be >= 0")
        if not (0.01 <= self.turn_length[0] <= self.turn_length[1]):
            # boundaries quantize to 1 ms; sub-centisecond turns collapse
            raise ValueError(f"bad turn_length {self.turn_length}")
        if not (0 <= self.overlap_fraction <= 1):
            raise ValueError("overlap_fraction must be in [0, 1]")
        if self.recordings < 1:
            raise ValueError("recordings must be >= 1")
        if self.target_speech <= 0 or self.speaker_balance <= 0:
            raise ValueError("target_speech and speaker_balance must be > 0")
        if not (0 < self.gap_length[0] <= self.gap_length[1]):
            raise ValueError(f"bad gap_length {self.gap_length}")


@dataclass
class SyntheticRecording:
    recording_id: str
    reference: Diarization
    vad: Timeline
    osd: Timeline
    duration: float
    true_speakers: int
    embeddings: dict[str, EmbeddingSet] = field(default_factory=dict)


def _q3(x: float) -> float:
    """Quantize to 3 decimals; all emitted boundaries live on this grid."""
    return round(x, 3)


def _recording_rng(seed: int, *keys: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    for i, k in enumerate(keys):
        key[1] ^= (k & _MASK64) << (16 * i) & _MASK64
    return np.random.Generator(np.random.Philox(key=key))


def _draw_centroids(rng: np.random.Generator, k: int, dim: int) -> np.ndarray:
    cents: list[np.ndarray] = []
    attempts = 0
    limit = 2000 * k
    while len(cents) < k:
        attempts += 1
        if attempts > limit:
            raise SynthesisError(
                f"could not place {k} centroids at pairwise cosine <= 0.5 "
                f"in dimension {dim}"
            )
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        if all(float(v @ c) <= 0.5 for c in cents):
            cents.append(v)
    return np.array(cents)


def _turn_sequence(
    rng: np.random.Generator, spec: SyntheticSpec, k: int
) -> list[tuple[int, float]]:
    """Speaker/length pairs: one pass over all speakers, then weighted draws."""
    shares = rng.dirichlet(spec.speaker_balance * np.ones(k)) if k > 1 else np.ones(1)
    lo, hi = spec.turn_length
    order = [int(s) for s in rng.permutation(k)]
    turns = [(s, float(rng.uniform(lo, hi))) for s in order]
    total = sum(length for _, length in turns)
    prev = order[-1]
    while total < spec.target_speech:
        if k == 1:
            s = 0
        else:
            w = shares.copy()
            w[prev] = 0.0
            w /= w.sum()
            s = int(rng.choice(k, p=w))
        length = float(rng.uniform(lo, hi))
        turns.append((s, length))
        total += length
        prev = s
    return turns


def _boundary_plan(
    rng: np.random.Generator, spec: SyntheticSpec, turns: list[tuple[int, float]]
) -> list[tuple[str, float]]:
    """Per-boundary treatment: ('overlap', d), ('gap', g), or ('butt', 0)."""
    plan: list[tuple[str, float]] = []
    for i in range(len(turns) - 1):
        eligible = turns[i][0] != turns[i + 1][0]
        if float(rng.uniform()) < spec.overlap_fraction and eligible:
            d = float(rng.uniform(0.3, 0.8))
            d = min(d, 0.4 * min(turns[i][1], turns[i + 1][1]))
            plan.append(("overlap", d))
        elif float(rng.uniform()) < spec.gap_fraction:
            plan.append(("gap", float(rng.uniform(*spec.gap_length))))
        else:
            plan.append(("butt", 0.0))
    return plan


def build_recording(
    spec: SyntheticSpec, index: int
) -> tuple[SyntheticRecording, np.ndarray]:
    """Generate one recording's reference, VAD, and OSD, plus its centroids."""
    rng = _recording_rng(spec.seed, index)
    lo, hi = spec.speakers_per_recording
    k = int(rng.integers(lo, hi + 1))
    centroids = _draw_centroids(rng, k, spec.dim)
    turns = _turn_sequence(rng, spec, k)
    plan = _boundary_plan(rng, spec, turns)

    labeled: list[tuple[Segment, str]] = []
    overlap_regions: list[Segment] = []
    cursor = 0.0
    left_ext = 0.0
    for i, (s, length) in enumerate(turns):
        onset = cursor - left_ext
        offset = cursor + length
        boundary = offset
        left_ext = 0.0
        kind, value = plan[i] if i < len(plan) else ("butt", 0.0)
        if kind == "overlap":
            offset = boundary + value / 2.0
            left_ext = value / 2.0
            overlap_regions.append(
                Segment(_q3(boundary - value / 2.0), _q3(boundary + value / 2.0))
            )
            cursor = boundary
        elif kind == "gap":
            cursor = boundary + value
        else:
            cursor = boundary
        labeled.append((Segment(_q3(onset), _q3(offset)), f"spk{s:02d}"))

    rec_id = f"rec{index:03d}"
    reference = Diarization(rec_id, labeled)
    vad = reference.speech()
    osd = Timeline(overlap_regions)
    duration = _q3(vad.extent().offset + 0.5)
    rec = SyntheticRecording(rec_id, reference, vad, osd, duration, k)
    return rec, centroids


def _window_embeddings(
    spec: SyntheticSpec,
    rec: SyntheticRecording,
    centroids: np.ndarray,
    scale: ScaleConfig,
    scale_index: int,
    index: int,
) -> EmbeddingSet:
    noise = _recording_rng(spec.seed ^ _NOISE_KEY, index * 64 + scale_index)
    windows = uniform_segmentation(rec.vad, scale)
    label_order = rec.reference.labels()
    timelines = {lab: rec.reference.label_timeline(lab) for lab in label_order}
    speaker_of = {f"spk{s:02d}": s for s in range(len(centroids))}
    vectors = np.empty((len(windows), spec.dim), dtype=np.float64)
    for w, seg in enumerate(windows):
        center = seg.middle
        active = [lab for lab in label_order if timelines[lab].covers(center)]
        if not active:
            # window centers always lie inside some turn by construction
            raise SynthesisError(f"window center {center} outside all turns")
        if len(active) >= 2:
            base = 0.5 * (
                centroids[speaker_of[active[0]]] + centroids[speaker_of[active[1]]]
            )
        else:
            base = centroids[speaker_of[active[0]]]
        vec = base + spec.intra_spread * noise.standard_normal(spec.dim)
        norm = np.linalg.norm(vec)
        if norm < 1e-9:
            vec, norm = base.copy(), np.linalg.norm(base)
        vectors[w] = vec / norm
    return EmbeddingSet(rec.recording_id, spec.dim, tuple(windows), vectors)


def synth_corpus(
    spec: SyntheticSpec, scales: tuple[ScaleConfig, ...] = DEFAULT_SCALES
) -> list[SyntheticRecording]:
    """Generate the full corpus: references, VAD/OSD, embeddings per scale."""
    out = []
    for index in range(spec.recordings):
        rec, centroids = build_recording(spec, index)
        for si, scale in enumerate(scales):
            rec.embeddings[scale.key] = _window_embeddings(
                spec, rec, centroids, scale, si, index
            )
        out.append(rec)
    return out


def write_corpus(recordings: list[SyntheticRecording], outdir: str | Path) -> None:
    """Write LAB/EVEC files per recording plus ref.rttm and durations.txt."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ref_lines = []
    dur_lines = []
    for rec in recordings:
        (outdir / f"{rec.recording_id}.vad.lab").write_text(
            emit_lab(rec.vad, "speech"), encoding="utf-8"
        )
        (outdir / f"{rec.recording_id}.osd.lab").write_text(
            emit_lab(rec.osd, "overlap"), encoding="utf-8"
        )
        for key, emb in rec.embeddings.items():
            (outdir / f"{rec.recording_id}.{key}.evec").write_text(
                emit_evec(emb), encoding="utf-8"
            )
        ref_lines.append(emit_rttm(rec.reference))
        dur_lines.append(f"{rec.recording_id} {rec.duration:.3f}\n")
    (outdir / "ref.rttm").write_text("".join(ref_lines), encoding="utf-8")
    (outdir / "durations.txt").write_text("".join(dur_lines), encoding="utf-8")
