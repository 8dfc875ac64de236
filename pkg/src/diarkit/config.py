"""Flat key = value pipeline configuration.

Dotted keys select per-scale sections, e.g. ``scale.1.sc_threshold =
0.04``; ``#`` starts a comment. Defaults reproduce the three-scale setup:
windows/hops 1.0/0.25, 1.0/0.5, 1.5/0.75 with binarization-search caps
0.04/0.07/0.10, re-cluster thresholds 0.047/0.04/0.048, under-clustering
on the coarsest scale only, and fusion weights 0.4/0.3/0.3.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .clustering import ClusterConfig
from .timeline import ScaleConfig


class ConfigError(ValueError):
    pass


_SCALE_DEFAULTS = (
    (ScaleConfig(1.0, 0.25), 0.04, False, 0.047, 0.4),
    (ScaleConfig(1.0, 0.5), 0.07, False, 0.04, 0.3),
    (ScaleConfig(1.5, 0.75), 0.10, True, 0.048, 0.3),
)

_GLOBAL_KEYS = {
    "seed": int,
    "collar": float,
    "workers": int,
    "max_speakers": int,
    "min_fragment_duration": float,
    "sv_threshold": float,
    "under_cluster_factor": float,
    "under_cluster_min_speakers": int,
}

_SCALE_KEYS = {
    "window": float,
    "hop": float,
    "sc_threshold": float,
    "under_cluster": bool,
    "recluster": float,
    "weight": float,
}


@dataclass(frozen=True)
class PipelineConfig:
    scales: tuple[ScaleConfig, ...]
    cluster: tuple[ClusterConfig, ...]
    weights: tuple[float, ...]
    collar: float = 0.25
    seed: int = 7
    workers: int = 1

    def __post_init__(self):
        if not (len(self.scales) == len(self.cluster) == len(self.weights)):
            raise ConfigError(
                "scales, cluster configs, and weights must have equal length"
            )
        if not self.scales:
            raise ConfigError("at least one scale is required")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise ConfigError("weights must be >= 0 and sum to > 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def default_config(seed: int = 7, workers: int = 1) -> PipelineConfig:
    scales, cluster, weights = [], [], []
    for scale, ratio, uc, rc, w in _SCALE_DEFAULTS:
        scales.append(scale)
        cluster.append(
            ClusterConfig(
                max_rp_ratio=ratio,
                under_cluster=uc,
                recluster_threshold=rc,
                seed=seed,
            )
        )
        weights.append(w)
    return PipelineConfig(
        tuple(scales), tuple(cluster), tuple(weights), seed=seed, workers=workers
    )


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("yes", "true", "1", "on"):
        return True
    if low in ("no", "false", "0", "off"):
        return False
    raise ConfigError(f"expected yes/no, got {raw!r}")


def parse_config(text: str) -> PipelineConfig:
    """Parse configuration text; unknown keys are errors."""
    globals_: dict[str, object] = {}
    scale_raw: dict[int, dict[str, object]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("scale."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit():
                raise ConfigError(f"line {line_no}: bad scale key {key!r}")
            idx, name = int(parts[1]), parts[2]
            if name not in _SCALE_KEYS:
                raise ConfigError(f"line {line_no}: unknown scale key {name!r}")
            caster = _SCALE_KEYS[name]
            try:
                parsed = _parse_bool(value) if caster is bool else caster(value)
            except ValueError as exc:
                raise ConfigError(f"line {line_no}: {exc}") from None
            scale_raw.setdefault(idx, {})[name] = parsed
        elif key in _GLOBAL_KEYS:
            try:
                globals_[key] = _GLOBAL_KEYS[key](value)
            except ValueError:
                raise ConfigError(f"line {line_no}: bad value for {key!r}") from None
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")

    seed = int(globals_.get("seed", 7))
    workers = int(globals_.get("workers", 1))
    collar = float(globals_.get("collar", 0.25))
    shared = {
        name: globals_[name]
        for name in (
            "max_speakers",
            "min_fragment_duration",
            "sv_threshold",
            "under_cluster_factor",
            "under_cluster_min_speakers",
        )
        if name in globals_
    }

    if scale_raw:
        indices = sorted(scale_raw)
        if indices != list(range(1, len(indices) + 1)):
            raise ConfigError(f"scale sections must be numbered 1..N, got {indices}")
        scales, cluster, weights = [], [], []
        for idx in indices:
            section = scale_raw[idx]
            if "window" not in section or "hop" not in section:
                raise ConfigError(f"scale.{idx} needs window and hop")
            scales.append(ScaleConfig(section["window"], section["hop"]))
            cluster.append(
                ClusterConfig(
                    max_rp_ratio=section.get("sc_threshold", 0.1),
                    under_cluster=section.get("under_cluster", False),
                    recluster_threshold=section.get("recluster", 0.047),
                    seed=seed,
                    **shared,
                )
            )
            weights.append(float(section.get("weight", 1.0)))
        return PipelineConfig(
            tuple(scales),
            tuple(cluster),
            tuple(weights),
            collar=collar,
            seed=seed,
            workers=workers,
        )

    base = default_config(seed=seed, workers=workers)
    cluster = tuple(replace(c, **shared) for c in base.cluster) if shared else base.cluster
    return replace(base, collar=collar, cluster=cluster)
