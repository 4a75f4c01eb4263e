"""Run configuration: one versioned schema covering every subsystem.

A config file is JSON with a top-level ``schema_version``. Unknown keys are
rejected anywhere in the tree so that typos never silently fall back to
defaults. CLI flags override file values; the fully resolved config is
archived next to each run's outputs and its hash is embedded in checkpoints.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .utils import canonical_json, sha256_bytes

SCHEMA_VERSION = 1


@dataclass
class GeneratorConfig:
    """Synthetic corpus generation knobs."""

    seed: int = 0
    num_styles: int = 32
    num_contents: int = 8
    images_per_style: int = 36
    image_size: int = 32
    holdout_styles: int = 8
    min_per_style: int = 30
    max_per_style: int = 200
    max_total_images: int = 50_000
    unlabeled_fraction: float = 0.0


@dataclass
class EncoderHyper:
    embed_dim: int = 128
    width: int = 32
    head_hidden: int = 128
    temperature: float = 0.1
    styles_per_batch: int = 8
    images_per_style_batch: int = 4
    steps: int = 1200
    lr: float = 1e-3
    val_every: int = 50
    checkpoint_every: int = 400
    crop_pad: int = 3
    aux_classifier: bool = False


@dataclass
class DiffusionHyper:
    timesteps: int = 1000
    base_channels: int = 32
    model_dim: int = 128
    num_heads: int = 4
    text_layers: int = 2
    style_tokens: int = 8
    max_text_len: int = 8
    batch_size: int = 16
    steps: int = 3500
    lr: float = 2e-3
    lr_min_factor: float = 0.1
    drop_text_prob: float = 0.05
    drop_style_prob: float = 0.05
    drop_both_prob: float = 0.05
    log_every: int = 50
    checkpoint_every: int = 1000


@dataclass
class Stage2Hyper:
    batch_size: int = 16
    steps: int = 2200
    lr: float = 1e-3
    tokenizer_hidden: int = 256
    drop_text_prob: float = 0.05
    drop_style_prob: float = 0.05
    drop_both_prob: float = 0.05
    log_every: int = 50


@dataclass
class SamplingConfig:
    steps: int = 50
    text_scale: float = 7.5
    style_scale: float = 1.5
    method: str = "ddim"  # "ddim" (deterministic) or "ancestral"
    batch_cells: int = 64


@dataclass
class EvalConfig:
    num_prompts: int = 8
    num_refs: int = 6
    num_seeds: int = 4
    probe_train_frac: float = 0.75
    probe_steps: int = 300
    probe_lr: float = 0.05


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    deterministic: bool = True
    data: GeneratorConfig = field(default_factory=GeneratorConfig)
    encoder: EncoderHyper = field(default_factory=EncoderHyper)
    diffusion: DiffusionHyper = field(default_factory=DiffusionHyper)
    stage2: Stage2Hyper = field(default_factory=Stage2Hyper)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        return sha256_bytes(canonical_json(self.to_dict()).encode())


_SECTIONS = {
    "data": GeneratorConfig,
    "encoder": EncoderHyper,
    "diffusion": DiffusionHyper,
    "stage2": Stage2Hyper,
    "sampling": SamplingConfig,
    "evaluation": EvalConfig,
}


def _build_section(cls, payload: dict, path: str):
    if not isinstance(payload, dict):
        raise ConfigError(f"config section '{path}' must be an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(payload) - set(known))
    if unknown:
        raise ConfigError(f"unknown config key(s) under '{path}': {', '.join(unknown)}")
    kwargs = {}
    for name, value in payload.items():
        want = known[name].type
        if want in ("int", int) and isinstance(value, bool):
            raise ConfigError(f"config key '{path}.{name}' must be an integer")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config section '{path}': {exc}") from exc


def config_from_dict(payload: dict) -> RunConfig:
    if not isinstance(payload, dict):
        raise ConfigError("config root must be an object")
    top_known = {"schema_version", "seed", "deterministic", *_SECTIONS}
    unknown = sorted(set(payload) - top_known)
    if unknown:
        raise ConfigError(f"unknown top-level config key(s): {', '.join(unknown)}")
    version = payload.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")
    cfg = RunConfig(
        schema_version=version,
        seed=int(payload.get("seed", 0)),
        deterministic=bool(payload.get("deterministic", True)),
    )
    for name, cls in _SECTIONS.items():
        if name in payload:
            setattr(cfg, name, _build_section(cls, payload[name], name))
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    return config_from_dict(payload)


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply ``{"section.key": value}`` overrides, returning a new config."""
    payload = cfg.to_dict()
    for dotted, value in overrides.items():
        node = payload
        *parents, leaf = dotted.split(".")
        for part in parents:
            if part not in node:
                raise ConfigError(f"unknown config key '{dotted}'")
            node = node[part]
        if leaf not in node and parents:
            raise ConfigError(f"unknown config key '{dotted}'")
        node[leaf] = value
    return config_from_dict(payload)
