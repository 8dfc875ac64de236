"""End-to-end orchestration: per scale, cluster the window embeddings,
turn them into speaker turns, assign overlap speakers; then fuse the
per-scale outputs and, when references are available, score everything.

Recordings are independent, so they can run on a process pool; results
are collected and written in recording-id order, making the output bytes
identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .clustering import cluster_recording
from .config import PipelineConfig
from .embeddings import parse_evec
from .fileio import emit_rttm, parse_lab, parse_rttm
from .fusion import Hypothesis, fuse
from .metrics import DerBreakdown, der, jer
from .overlap import assign_overlaps
from .timeline import Diarization, windows_to_turns


@dataclass
class RecordingResult:
    recording_id: str
    per_scale: list[Diarization]
    fused: Diarization


@dataclass
class PipelineOutcome:
    results: list[RecordingResult]
    failures: list[tuple[str, str]]  # (recording_id, message)


def discover_recordings(input_dir: str | Path) -> list[str]:
    return sorted(p.name[: -len(".vad.lab")] for p in Path(input_dir).glob("*.vad.lab"))


def process_recording(
    rec: str, input_dir: str | Path, config: PipelineConfig
) -> RecordingResult:
    """Cluster, reconstruct turns, and assign overlaps for every scale."""
    input_dir = Path(input_dir)
    speech = parse_lab(
        (input_dir / f"{rec}.vad.lab").read_text(encoding="utf-8"), "speech"
    )
    osd = parse_lab(
        (input_dir / f"{rec}.osd.lab").read_text(encoding="utf-8"), "overlap"
    )
    per_scale = []
    for scale, cluster_cfg in zip(config.scales, config.cluster):
        evec_path = input_dir / f"{rec}.{scale.key}.evec"
        embs = parse_evec(evec_path.read_text(encoding="utf-8"))
        if embs.recording_id and embs.recording_id != rec:
            raise ValueError(
                f"{evec_path.name}: recording id {embs.recording_id!r} "
                f"does not match file name"
            )
        assignment = cluster_recording(embs, cluster_cfg)
        labels = [f"spk{lab:02d}" for lab in assignment.labels]
        d = windows_to_turns(rec, list(embs.segments), labels)
        per_scale.append(assign_overlaps(d, osd, speech))
    fused = fuse(
        [Hypothesis(d, w) for d, w in zip(per_scale, config.weights)]
    )
    return RecordingResult(rec, per_scale, fused)


def run_pipeline(
    input_dir: str | Path, config: PipelineConfig, recordings: list[str] | None = None
) -> PipelineOutcome:
    recs = discover_recordings(input_dir) if recordings is None else recordings
    results: list[RecordingResult] = []
    failures: list[tuple[str, str]] = []
    if config.workers > 1 and len(recs) > 1:
        jobs = [(rec, str(input_dir), config) for rec in recs]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for rec, outcome in zip(recs, pool.map(_try_star, jobs)):
                ok, payload = outcome
                if ok:
                    results.append(payload)
                else:
                    failures.append((rec, payload))
    else:
        for rec in recs:
            try:
                results.append(process_recording(rec, input_dir, config))
            except Exception as exc:  # noqa: BLE001 - collected per recording
                failures.append((rec, str(exc)))
    results.sort(key=lambda r: r.recording_id)
    failures.sort()
    return PipelineOutcome(results, failures)


def _try_star(args):
    try:
        return True, process_recording(*args)
    except Exception as exc:  # noqa: BLE001 - reported by the caller
        return False, str(exc)


def write_outputs(
    outcome: PipelineOutcome, config: PipelineConfig, output_dir: str | Path
) -> list[Path]:
    """Write one RTTM per scale plus the fused RTTM; returns the paths."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for si, scale in enumerate(config.scales):
        path = output_dir / f"scale{si + 1}_{scale.key}.rttm"
        path.write_text(
            "".join(emit_rttm(r.per_scale[si]) for r in outcome.results),
            encoding="utf-8",
        )
        paths.append(path)
    fused_path = output_dir / "fused.rttm"
    fused_path.write_text(
        "".join(emit_rttm(r.fused) for r in outcome.results), encoding="utf-8"
    )
    paths.append(fused_path)
    return paths


def _aggregate(breakdowns: list[DerBreakdown]) -> DerBreakdown:
    return DerBreakdown(
        sum(b.total for b in breakdowns),
        sum(b.miss for b in breakdowns),
        sum(b.false_alarm for b in breakdowns),
        sum(b.confusion for b in breakdowns),
    )


@dataclass
class SystemScore:
    name: str
    der: DerBreakdown
    jer: float


def score_outcome(
    outcome: PipelineOutcome,
    references: dict[str, Diarization],
    config: PipelineConfig,
) -> list[SystemScore]:
    """DER/JER per system (each scale, then the fused output).

    Corpus DER aggregates error components over recordings before
    dividing; corpus JER is the mean of per-recording values.
    """
    scores = []
    systems: list[tuple[str, list[Diarization]]] = []
    for si, scale in enumerate(config.scales):
        systems.append(
            (f"scale {scale.window:g}s/{scale.hop:g}s", [r.per_scale[si] for r in outcome.results])
        )
    systems.append(("fusion", [r.fused for r in outcome.results]))
    for name, hyps in systems:
        parts, jers = [], []
        for result, hyp in zip(outcome.results, hyps):
            ref = references.get(result.recording_id)
            if ref is None:
                raise ValueError(f"no reference for recording {result.recording_id!r}")
            parts.append(der(ref, hyp, config.collar))
            jers.append(jer(ref, hyp))
        scores.append(
            SystemScore(name, _aggregate(parts), sum(jers) / len(jers) if jers else 0.0)
        )
    return scores


def load_references(path: str | Path) -> dict[str, Diarization]:
    return parse_rttm(Path(path).read_text(encoding="utf-8"))


def format_score_table(scores: list[SystemScore]) -> str:
    """Aligned ``system | DER | JER`` table."""
    rows = [("System", "DER", "JER")]
    for s in scores:
        rows.append((s.name, f"{100 * s.der.der:.2f}%", f"{100 * s.jer:.2f}%"))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = [
        " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    return "".join(line + "\n" for line in lines)
