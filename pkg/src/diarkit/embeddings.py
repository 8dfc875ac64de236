"""Embedding file I/O and cosine affinity construction.

The EVEC text format carries one recording's window embeddings:
first line ``EVEC <dim>``, then one line per window:
``<rec> <onset> <offset> <dim floats>``. Vectors are L2-normalized on
load; the cosine geometry downstream assumes unit vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fileio import ParseError
from .timeline import Segment

ZERO_NORM = 1e-12


@dataclass(frozen=True)
class EmbeddingSet:
    """Per-recording window embeddings, sorted by onset, unit L2 norm."""

    recording_id: str
    dim: int
    segments: tuple[Segment, ...]
    vectors: np.ndarray  # shape (n, dim)

    def __len__(self) -> int:
        return len(self.segments)

    @classmethod
    def build(
        cls,
        recording_id: str,
        dim: int,
        entries: list[tuple[Segment, np.ndarray]],
    ) -> "EmbeddingSet":
        """Normalize, validate, and onset-sort raw entries."""
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        entries = sorted(entries, key=lambda e: (e[0].onset, e[0].offset))
        segs = tuple(seg for seg, _ in entries)
        if entries:
            vecs = np.array([v for _, v in entries], dtype=np.float64)
            if vecs.shape[1] != dim:
                raise ValueError(
                    f"vector dimension {vecs.shape[1]} does not match dim {dim}"
                )
            norms = np.linalg.norm(vecs, axis=1)
            if np.any(norms < ZERO_NORM):
                raise ValueError("zero-norm embedding vector")
            vecs = vecs / norms[:, None]
        else:
            vecs = np.zeros((0, dim), dtype=np.float64)
        return cls(recording_id, dim, segs, vecs)

    def durations(self) -> np.ndarray:
        return np.array([s.duration for s in self.segments], dtype=np.float64)


def parse_evec(text: str) -> EmbeddingSet:
    """Parse one EVEC file (single recording)."""
    lines = text.splitlines()
    if not lines:
        raise ParseError(1, "missing EVEC header")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "EVEC":
        raise ParseError(1, f"expected 'EVEC <dim>' header, got {lines[0]!r}")
    try:
        dim = int(header[1])
    except ValueError:
        raise ParseError(1, f"non-integer dimension {header[1]!r}") from None
    if dim < 1:
        raise ParseError(1, f"dimension must be >= 1, got {dim}")

    rec_id = ""
    entries: list[tuple[Segment, np.ndarray]] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3 + dim:
            raise ParseError(
                line_no, f"expected {3 + dim} fields for dim {dim}, got {len(fields)}"
            )
        rec = fields[0]
        if not rec_id:
            rec_id = rec
        elif rec != rec_id:
            raise ParseError(line_no, f"mixed recording ids {rec_id!r} and {rec!r}")
        try:
            onset, offset = float(fields[1]), float(fields[2])
            vec = np.array([float(x) for x in fields[3:]], dtype=np.float64)
        except ValueError:
            raise ParseError(line_no, "non-numeric value") from None
        if not (0.0 <= onset < offset):
            raise ParseError(line_no, f"invalid window [{onset}, {offset})")
        if np.linalg.norm(vec) < ZERO_NORM:
            raise ParseError(line_no, "zero vector")
        entries.append((Segment(onset, offset), vec))
    return EmbeddingSet.build(rec_id, dim, entries)


def emit_evec(e: EmbeddingSet) -> str:
    """Serialize an EmbeddingSet; round-trips within 1e-6 per coordinate."""
    out = [f"EVEC {e.dim}"]
    for seg, vec in zip(e.segments, e.vectors):
        coords = " ".join(f"{x:.8f}" for x in vec)
        out.append(f"{e.recording_id} {seg.onset:.4f} {seg.offset:.4f} {coords}")
    return "".join(line + "\n" for line in out)


def cosine_affinity(e: EmbeddingSet) -> np.ndarray:
    """Pairwise cosine similarity; symmetric, values in [-1, 1], unit diagonal."""
    if len(e) < 1:
        raise ValueError("empty embedding set")
    a = e.vectors @ e.vectors.T
    a = (a + a.T) / 2.0
    np.clip(a, -1.0, 1.0, out=a)
    np.fill_diagonal(a, 1.0)
    return a


def validate_affinity(a: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check the affinity-matrix contract; returns the validated array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"affinity must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.T)) > tol:
        raise ValueError("affinity is not symmetric")
    if np.any(a > 1.0 + tol) or np.any(a < -1.0 - tol):
        raise ValueError("affinity values outside [-1, 1]")
    if np.max(np.abs(np.diag(a) - 1.0)) > tol:
        raise ValueError("affinity diagonal must be 1")
    return a
