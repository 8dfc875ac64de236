"""diarkit: clustering-based speaker diarization back end.

Time-interval algebra and RTTM/LAB I/O, a synthetic embedding corpus with
exact ground truth, auto-tuning spectral clustering with eigengap speaker
counting, overlap assignment, overlap-aware hypothesis fusion, and the
full evaluation suite (DER, JER, VAD error, EER, score normalization).
"""

from .audio import AudioBuffer, CorpusStats, SnrReport, corpus_stats, estimate_snr, low_snr_ratio, read_wav
from .clustering import (
    ClusterAssignment,
    ClusterConfig,
    binarize_affinity,
    cluster_recording,
    nme_estimate,
    recluster,
    short_duration_filter,
    spectral_kmeans,
    under_cluster_adjust,
)
from .eigh import EigenSystem, jacobi_eigh
from .embeddings import EmbeddingSet, cosine_affinity, emit_evec, parse_evec
from .fileio import ParseError, emit_lab, emit_rttm, emit_rttm_all, parse_lab, parse_rttm
from .fusion import GlobalLabelMap, Hypothesis, fuse, map_labels
from .metrics import (
    DerBreakdown,
    TrialPair,
    as_norm,
    der,
    eer,
    jer,
    make_trials,
    speaker_count_stats,
    vad_error,
)
from .overlap import OverlapPolicy, assign_overlaps
from .synth import SyntheticSpec, synth_corpus, write_corpus
from .timeline import (
    Diarization,
    ScaleConfig,
    Segment,
    Timeline,
    uniform_segmentation,
    vad_postprocess,
    windows_to_turns,
)

__version__ = "0.1.0"
