"""Pipeline settings: defaults, JSON config files and flag overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import InvalidConfig
from .features import DEFAULT_THRESHOLD, FEATURE_CHANNELS, default_channel_configs
from .ingest import ChannelId
from .learn.cv import DEFAULT_C_CLASSIFY, DEFAULT_C_REGRESS, DEFAULT_EPSILON
from .persistence import EssentialPolicy
from .pimage import PersistenceImageConfig


@dataclass(frozen=True)
class PipelineConfig:
    manifest: Path | None = None
    out: Path = Path("out")
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    thresholds: dict = field(default_factory=dict)
    images: dict = field(default_factory=default_channel_configs)
    C_classify: float = DEFAULT_C_CLASSIFY
    C_regress: float = DEFAULT_C_REGRESS
    epsilon: float = DEFAULT_EPSILON
    penalty: str = "l1"
    essential: EssentialPolicy = EssentialPolicy.PAIR_WITH_GLOBAL_MAX
    fold_safe: bool = False
    jobs: int = 1

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Apply flag values; ``None`` means the flag was not given."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def select_channels(self, channels) -> "PipelineConfig":
        chosen = [ChannelId.parse(c) if isinstance(c, str) else ChannelId(c) for c in channels]
        return replace(self, images={c: self.images[c] for c in FEATURE_CHANNELS if c in chosen})


def _image_config(base: PersistenceImageConfig, doc: dict) -> PersistenceImageConfig:
    merged = {**base.to_json(), **doc}
    if "birth_range" in doc and "pers_range" not in doc:
        merged["pers_range"] = None
    return PersistenceImageConfig.from_json(merged)


def load_config(path) -> PipelineConfig:
    """Read a JSON config; unknown keys are rejected."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(doc) - known
    if unknown:
        raise InvalidConfig(f"{path}: unknown keys {sorted(unknown)}")
    cfg = PipelineConfig()
    kwargs = {}
    for key, value in doc.items():
        if key in ("manifest", "out"):
            kwargs[key] = Path(value) if value is not None else None
        elif key == "essential":
            kwargs[key] = EssentialPolicy(value)
        elif key == "images":
            images = dict(cfg.images)
            for name, sub in value.items():
                c = ChannelId.parse(name)
                if c not in images:
                    raise InvalidConfig(f"channel {name} is not featurized")
                images[c] = _image_config(images[c], sub)
            kwargs[key] = images
        elif key == "thresholds":
            kwargs[key] = {ChannelId.parse(k): float(v) for k, v in value.items()}
        else:
            kwargs[key] = value
    return replace(cfg, **kwargs)
