"""Command-line front end.

Subcommands wrap one operation each; `pipeline` runs the whole flow.
Exit codes: 0 ok, 1 data/processing failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import audio as audio_mod
from .clustering import ClusterConfig, cluster_recording
from .config import ConfigError, default_config, parse_config
from .embeddings import parse_evec
from .fileio import ParseError, emit_lab, emit_rttm, emit_rttm_all, parse_lab, parse_rttm
from .fusion import Hypothesis, fuse
from .metrics import der, eer, jer, make_trials, vad_error
from .overlap import assign_overlaps
from .pipeline import (
    discover_recordings,
    format_score_table,
    load_references,
    run_pipeline,
    score_outcome,
    write_outputs,
)
from .synth import DEFAULT_SCALES, SyntheticSpec, synth_corpus, write_corpus
from .timeline import ScaleConfig, uniform_segmentation, windows_to_turns


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_scales(raw: str) -> tuple[ScaleConfig, ...]:
    scales = []
    for part in raw.split(","):
        window, hop = part.strip().split("/")
        scales.append(ScaleConfig(float(window), float(hop)))
    return tuple(scales)


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        recordings=args.recordings,
        speakers_per_recording=(args.speakers[0], args.speakers[1]),
        dim=args.dim,
        intra_spread=args.spread,
        overlap_fraction=args.overlap_fraction,
        seed=args.seed,
        target_speech=args.target_speech,
    )
    recs = synth_corpus(spec, _parse_scales(args.scales))
    write_corpus(recs, args.out)
    print(f"wrote {len(recs)} recordings to {args.out}")
    return 0


def cmd_stats(args) -> int:
    if args.wav and args.ref:
        print("use either --wav or --ref, not both", file=sys.stderr)
        return 2
    if args.wav:
        reports = []
        for path in args.wav:
            buf = audio_mod.read_wav(Path(path).read_bytes())
            reports.append(
                audio_mod.low_snr_ratio(
                    buf, args.segment_len, args.threshold, recording_id=Path(path).stem
                )
            )
        width = max(len("Recording"), max(len(r.recording_id) for r in reports))
        print(f"{'Recording':<{width}} | Segments | Low-SNR ratio")
        for r in reports:
            print(
                f"{r.recording_id:<{width}} | {len(r.per_segment_snr):>8} "
                f"| {r.low_snr_ratio:.4f}"
            )
        for r in reports:
            print(f"rec {r.recording_id} ratio {r.low_snr_ratio:.4f}")
        return 0
    if not args.ref or not args.durations:
        print("corpus stats need --ref and --durations", file=sys.stderr)
        return 2
    refs = parse_rttm(Path(args.ref).read_text(encoding="utf-8"))
    durations = {}
    for line in Path(args.durations).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec, dur = line.split()
            durations[rec] = float(dur)
    stats = audio_mod.corpus_stats(refs, durations)

    def triple(t):
        return f"{t.minimum:g}/{t.mean:.1f}/{t.maximum:g}"

    print(f"Audios        | {stats.audios}")
    print(f"Audio dur (s) | {triple(stats.audio_duration)}")
    print(f"Speech dur (s)| {triple(stats.speech_duration)}")
    print(f"Speakers      | {triple(stats.speakers)}")
    ov = stats.overlap_ratio
    print(
        "Overlap ratio | "
        f"{100 * ov.minimum:.1f}%/{100 * ov.mean:.1f}%/{100 * ov.maximum:.1f}%"
    )
    return 0


def cmd_segment(args) -> int:
    speech = parse_lab(Path(args.vad).read_text(encoding="utf-8"), "speech")
    windows = uniform_segmentation(speech, ScaleConfig(args.window, args.hop))
    text = "".join(f"{w.onset:.3f} {w.offset:.3f}\n" for w in windows)
    _write_or_print(text, args.out)
    return 0


def cmd_cluster(args) -> int:
    embs = parse_evec(Path(args.evec).read_text(encoding="utf-8"))
    cfg = ClusterConfig(
        max_rp_ratio=args.sc_threshold,
        under_cluster=args.under_cluster,
        recluster_threshold=args.recluster,
        min_fragment_duration=args.min_fragment_duration,
        sv_threshold=args.sv_threshold,
        max_speakers=args.max_speakers,
        seed=args.seed,
    )
    assignment = cluster_recording(embs, cfg)
    labels = [f"spk{lab:02d}" for lab in assignment.labels]
    d = windows_to_turns(embs.recording_id, list(embs.segments), labels)
    _write_or_print(emit_rttm(d), args.out)
    return 0


def cmd_overlap(args) -> int:
    hyps = parse_rttm(Path(args.rttm).read_text(encoding="utf-8"))
    osd = parse_lab(Path(args.osd).read_text(encoding="utf-8"), "overlap")
    speech = parse_lab(Path(args.vad).read_text(encoding="utf-8"), "speech")
    out = {
        rec: assign_overlaps(d, osd, speech) for rec, d in sorted(hyps.items())
    }
    _write_or_print(emit_rttm_all(out), args.out)
    return 0


def cmd_fuse(args) -> int:
    weights = [float(w) for w in args.weights.split(",")]
    if len(weights) != len(args.rttm):
        print(
            f"{len(args.rttm)} inputs but {len(weights)} weights", file=sys.stderr
        )
        return 2
    systems = [
        parse_rttm(Path(p).read_text(encoding="utf-8")) for p in args.rttm
    ]
    recs = sorted(set().union(*(set(s) for s in systems)))
    fused = {}
    for rec in recs:
        hyps = [
            Hypothesis(system[rec], w)
            for system, w in zip(systems, weights)
            if rec in system
        ]
        fused[rec] = fuse(hyps)
    _write_or_print(emit_rttm_all(fused), args.out)
    return 0


def cmd_score(args) -> int:
    if args.mode == "vad":
        if args.total is None:
            print("--mode vad needs --total seconds", file=sys.stderr)
            return 2
        ref = parse_lab(Path(args.ref).read_text(encoding="utf-8"), "speech")
        hyp = parse_lab(Path(args.hyp).read_text(encoding="utf-8"), "speech")
        miss, fa, err = vad_error(ref, hyp, args.total)
        print("Miss  | FA    | Error")
        print(f"{miss:.2f}  | {fa:.2f}  | {err:.2f}")
        return 0
    if args.mode == "eer":
        # --ref is the trial list, --hyp the score file (<trial-index> <score>)
        targets = []
        for line_no, raw in enumerate(
            Path(args.ref).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not raw.strip():
                continue
            fields = raw.split()
            if len(fields) != 3 or fields[2] not in ("target", "nontarget"):
                raise ParseError(line_no, f"bad trial line {raw!r}")
            targets.append(fields[2] == "target")
        scores: dict[int, float] = {}
        for line_no, raw in enumerate(
            Path(args.hyp).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not raw.strip():
                continue
            fields = raw.split()
            if len(fields) != 2:
                raise ParseError(line_no, f"bad score line {raw!r}")
            idx = int(fields[0])
            if not (0 <= idx < len(targets)):
                raise ParseError(line_no, f"trial index {idx} out of range")
            scores[idx] = float(fields[1])
        if len(scores) != len(targets):
            print(
                f"{len(targets)} trials but {len(scores)} scores", file=sys.stderr
            )
            return 1
        value = eer([(scores[i], targets[i]) for i in range(len(targets))])
        print(f"trials {len(targets)} EER {100 * value:.2f}%")
        return 0
    refs = parse_rttm(Path(args.ref).read_text(encoding="utf-8"))
    hyps = parse_rttm(Path(args.hyp).read_text(encoding="utf-8"))
    missing = sorted(set(refs) - set(hyps))
    if missing:
        print(f"hypothesis missing recordings: {', '.join(missing)}", file=sys.stderr)
        return 1
    total = miss = fa = conf = 0.0
    jers = []
    print("Recording    | DER     | Miss    | FA      | Conf    | JER")
    for rec in sorted(refs):
        b = der(refs[rec], hyps[rec], args.collar)
        j = jer(refs[rec], hyps[rec])
        jers.append(j)
        total += b.total
        miss += b.miss
        fa += b.false_alarm
        conf += b.confusion
        print(
            f"{rec:<12} | {100 * b.der:6.2f}% | {100 * b.miss / b.total if b.total else 0:6.2f}%"
            f" | {100 * b.false_alarm / b.total if b.total else 0:6.2f}%"
            f" | {100 * b.confusion / b.total if b.total else 0:6.2f}% | {100 * j:6.2f}%"
        )
    if total > 0:
        overall = 100 * (miss + fa + conf) / total
        print(
            f"{'TOTAL':<12} | {overall:6.2f}% | {100 * miss / total:6.2f}%"
            f" | {100 * fa / total:6.2f}% | {100 * conf / total:6.2f}%"
            f" | {100 * sum(jers) / len(jers):6.2f}%"
        )
    return 0


def cmd_trials(args) -> int:
    refs = parse_rttm(Path(args.ref).read_text(encoding="utf-8"))
    trials = make_trials(refs, seed=args.seed, count=args.count)
    if trials.truncated:
        print(
            f"requested {trials.requested} pairs, emitting {len(trials.trials)}",
            file=sys.stderr,
        )
    text = "".join(
        f"{t.enroll.key()} {t.test.key()} {'target' if t.target else 'nontarget'}\n"
        for t in trials.trials
    )
    _write_or_print(text, args.out)
    return 0


def cmd_pipeline(args) -> int:
    if args.config:
        try:
            config = parse_config(Path(args.config).read_text(encoding="utf-8"))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
    else:
        config = default_config()
    if args.seed is not None:
        config = replace(
            config,
            seed=args.seed,
            cluster=tuple(replace(c, seed=args.seed) for c in config.cluster),
        )
    workers = args.workers or int(os.environ.get("DIARKIT_WORKERS", "0")) or config.workers
    config = replace(config, workers=workers)

    recs = discover_recordings(args.input)
    if not recs:
        print(f"no recordings found in {args.input} (0 *.vad.lab files)", file=sys.stderr)
        return 1
    outcome = run_pipeline(args.input, config, recs)
    paths = write_outputs(outcome, config, args.output)
    for rec, message in outcome.failures:
        print(f"FAILED {rec}: {message}", file=sys.stderr)
    print(f"processed {len(outcome.results)}/{len(recs)} recordings")
    for path in paths:
        print(f"wrote {path}")

    ref_path = Path(args.ref) if args.ref else Path(args.input) / "ref.rttm"
    if ref_path.exists() and outcome.results:
        references = load_references(ref_path)
        scores = score_outcome(outcome, references, config)
        table = format_score_table(scores)
        (Path(args.output) / "report.txt").write_text(table, encoding="utf-8")
        print(table, end="")
    return 1 if outcome.failures else 0


def _add_seed(subparser) -> None:
    # same dest as the global flag; SUPPRESS keeps an absent subcommand
    # flag from clobbering a seed given before the subcommand
    subparser.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="RNG seed"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diarkit",
        description="Clustering-based speaker diarization back end and scoring tools",
    )
    parser.add_argument("--seed", type=int, default=None, help="global RNG seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic embedding corpus")
    _add_seed(p)
    p.add_argument("--out", required=True)
    p.add_argument("--recordings", type=int, default=50)
    p.add_argument("--speakers", type=int, nargs=2, default=[2, 8], metavar=("MIN", "MAX"))
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--spread", type=float, default=0.08)
    p.add_argument("--overlap-fraction", type=float, default=0.15)
    p.add_argument("--target-speech", type=float, default=60.0)
    p.add_argument(
        "--scales", default="1.0/0.25,1.0/0.5,1.5/0.75", help="comma list of window/hop"
    )
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="corpus statistics or per-file SNR reports")
    p.add_argument("--wav", nargs="*", default=None)
    p.add_argument("--ref", default=None)
    p.add_argument("--durations", default=None)
    p.add_argument("--segment-len", type=float, default=3.0)
    p.add_argument("--threshold", type=float, default=5.0)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("segment", help="uniform segmentation of a VAD timeline")
    p.add_argument("--vad", required=True)
    p.add_argument("--window", type=float, required=True)
    p.add_argument("--hop", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("cluster", help="cluster one recording's embeddings")
    _add_seed(p)
    p.add_argument("--evec", required=True)
    p.add_argument("--sc-threshold", type=float, default=0.1)
    p.add_argument("--under-cluster", action="store_true")
    p.add_argument("--recluster", type=float, default=0.047)
    p.add_argument("--min-fragment-duration", type=float, default=2.5)
    p.add_argument("--sv-threshold", type=float, default=0.15)
    p.add_argument("--max-speakers", type=int, default=25)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("overlap", help="assign second speakers in overlap regions")
    p.add_argument("--rttm", required=True)
    p.add_argument("--osd", required=True)
    p.add_argument("--vad", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("fuse", help="fuse multiple diarization hypotheses")
    p.add_argument("rttm", nargs="+")
    p.add_argument("--weights", default="0.4,0.3,0.3")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("score", help="score a hypothesis against a reference")
    p.add_argument("--mode", choices=("der", "vad", "eer"), default="der")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--collar", type=float, default=0.25)
    p.add_argument("--total", type=float, default=None, help="recording seconds (vad mode)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("trials", help="build verification trial pairs from references")
    _add_seed(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("pipeline", help="run the full multi-scale pipeline")
    _add_seed(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--ref", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = 7
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
