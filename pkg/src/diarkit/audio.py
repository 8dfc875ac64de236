"""WAV ingestion, segment-level SNR estimation, and corpus statistics.

The SNR estimator is a percentile-energy method: frame powers over 25 ms
frames at a 10 ms step, noise floor = mean of the lowest 20% of frame
powers, signal level = mean of the highest 20%. It is deterministic,
invariant to global gain, and testable against constructed mixtures.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .timeline import Diarization

SNR_FLOOR = -10.0
SNR_CEIL = 60.0
FRAME_LEN = 0.025
FRAME_STEP = 0.010


class FormatError(ValueError):
    """A WAV container problem; the message names the offending chunk."""


@dataclass(frozen=True)
class AudioBuffer:
    sample_rate: int
    samples: np.ndarray  # float64 in [-1, 1]

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if len(self.samples) == 0:
            raise ValueError("empty audio buffer")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class SnrReport:
    recording_id: str
    per_segment_snr: tuple[float, ...]
    low_snr_ratio: float


@dataclass(frozen=True)
class TripleStat:
    minimum: float
    mean: float
    maximum: float

    @classmethod
    def of(cls, values: list[float]) -> "TripleStat":
        return cls(min(values), sum(values) / len(values), max(values))


@dataclass(frozen=True)
class CorpusStats:
    audios: int
    audio_duration: TripleStat
    speech_duration: TripleStat
    speakers: TripleStat
    overlap_ratio: TripleStat


def read_wav(data: bytes) -> AudioBuffer:
    """Parse a RIFF/WAVE container holding 16-bit PCM mono samples.

    Samples are scaled to [-1, 1] by division by 32768.
    """
    if len(data) < 12 or data[0:4] != b"RIFF":
        raise FormatError("missing RIFF header")
    if data[8:12] != b"WAVE":
        raise FormatError("RIFF container is not WAVE")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            name = chunk_id.decode("ascii", "replace").strip()
            raise FormatError(f"truncated {name} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError("truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None:
        raise FormatError("missing fmt chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise FormatError(f"unsupported codec in fmt chunk (format {audio_format})")
    if channels != 1:
        raise FormatError(f"unsupported channel count: {channels}")
    if bits != 16:
        raise FormatError(f"unsupported sample width: {bits} bits")
    if payload is None:
        raise FormatError("truncated data chunk")
    if len(payload) < 2:
        raise FormatError("empty data chunk")
    samples = np.frombuffer(payload[: len(payload) - (len(payload) % 2)], dtype="<i2")
    return AudioBuffer(sample_rate, samples.astype(np.float64) / 32768.0)


def write_wav(buf: AudioBuffer) -> bytes:
    """Serialize an AudioBuffer back to 16-bit PCM mono (test utility)."""
    pcm = np.clip(np.round(buf.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        buf.sample_rate,
        buf.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    return header + payload


def _frame_powers(buf: AudioBuffer) -> np.ndarray:
    flen = round(FRAME_LEN * buf.sample_rate)
    step = round(FRAME_STEP * buf.sample_rate)
    n = len(buf.samples)
    count = (n - flen) // step + 1
    sq = np.concatenate(([0.0], np.cumsum(buf.samples.astype(np.float64) ** 2)))
    starts = np.arange(count) * step
    return (sq[starts + flen] - sq[starts]) / flen


def estimate_snr(buf: AudioBuffer) -> float:
    """Percentile-energy SNR in dB, clamped to [-10, 60].

    SNR = 10 log10((S - N) / N) with N the mean of the lowest 20% of
    frame powers and S the mean of the highest 20%; returns -10 when
    S <= N.
    """
    if len(buf.samples) < 0.1 * buf.sample_rate:
        raise ValueError("need at least 100 ms of audio for SNR estimation")
    powers = np.sort(_frame_powers(buf))
    k = max(1, int(0.2 * len(powers)))
    noise = float(np.mean(powers[:k]))
    signal = float(np.mean(powers[-k:]))
    if signal <= noise:
        return SNR_FLOOR
    if noise <= 0.0:
        return SNR_CEIL
    snr = 10.0 * math.log10((signal - noise) / noise)
    return min(max(snr, SNR_FLOOR), SNR_CEIL)


def low_snr_ratio(
    buf: AudioBuffer,
    segment_len: float = 3.0,
    threshold: float = 5.0,
    recording_id: str = "",
) -> SnrReport:
    """Cut into consecutive segments and report the low-SNR fraction.

    The final partial segment is dropped rather than padded, which avoids
    biased estimates on short tails.
    """
    seg_samples = round(segment_len * buf.sample_rate)
    count = len(buf.samples) // seg_samples
    if count < 1:
        raise ValueError(
            f"audio shorter than one {segment_len:g} s segment"
        )
    snrs = []
    for i in range(count):
        chunk = buf.samples[i * seg_samples : (i + 1) * seg_samples]
        snrs.append(estimate_snr(AudioBuffer(buf.sample_rate, chunk)))
    low = sum(1 for s in snrs if s < threshold)
    return SnrReport(recording_id, tuple(snrs), low / count)


def corpus_stats(
    refs: dict[str, Diarization], durations: dict[str, float]
) -> CorpusStats:
    """Per-corpus min/mean/max of durations, speaker counts, and overlap.

    Speech duration is the measure of the union of a recording's turns;
    the overlap ratio is the measure of regions with two or more
    concurrent speakers divided by the speech duration.
    """
    if not refs:
        raise ValueError("no recordings")
    audio_d, speech_d, speakers, overlap = [], [], [], []
    for rec in sorted(refs):
        if rec not in durations:
            raise ValueError(f"missing duration for recording {rec!r}")
        d = refs[rec]
        speech = d.speech().duration()
        audio_d.append(float(durations[rec]))
        speech_d.append(speech)
        speakers.append(float(len(d.labels())))
        overlap.append(
            d.concurrency(2).duration() / speech if speech > 0 else 0.0
        )
    return CorpusStats(
        audios=len(refs),
        audio_duration=TripleStat.of(audio_d),
        speech_duration=TripleStat.of(speech_d),
        speakers=TripleStat.of(speakers),
        overlap_ratio=TripleStat.of(overlap),
    )
