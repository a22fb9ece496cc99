"""Encoder architecture configuration and presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

SCHEMES = ("concat_fusion", "layout_induced")


@dataclass(frozen=True)
class EncoderConfig:
    scheme: str = "concat_fusion"
    layers: int = 4
    heads: int = 4
    hidden_size: int = 128
    ffn_size: int = 512
    patch_size: int = 16
    image_size: int = 224
    max_sequence: int = 448
    vocab_size: int = 2000  # word-entry budget for the built vocabulary
    position_bins: int = 1000
    pooling: str = "mean"  # mean | first
    num_classes: int = 9
    dtype: str = "float32"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.hidden_size % self.heads != 0:
            raise ValueError("hidden_size must be divisible by heads")
        if self.image_size % self.patch_size != 0:
            raise ValueError("patch_size must divide image_size")
        if self.pooling not in ("mean", "first"):
            raise ValueError(f"unknown pooling {self.pooling!r}")
        if self.max_sequence <= self.n_patches:
            raise ValueError("max_sequence leaves no room for text tokens")

    @property
    def grid(self) -> int:
        return self.image_size // self.patch_size

    @property
    def n_patches(self) -> int:
        return self.grid * self.grid

    @property
    def text_budget(self) -> int:
        return self.max_sequence - self.n_patches

    @property
    def head_dim(self) -> int:
        return self.hidden_size // self.heads

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EncoderConfig":
        return cls(**json.loads(text))


def full_concat_fusion() -> EncoderConfig:
    """Full-scale reference preset for the concatenation fusion scheme."""
    return EncoderConfig(scheme="concat_fusion", layers=12, heads=12,
                         hidden_size=768, ffn_size=3072, max_sequence=708,
                         vocab_size=30000)


def full_layout_induced() -> EncoderConfig:
    """Full-scale reference preset for the layout-induced fusion scheme."""
    return EncoderConfig(scheme="layout_induced", layers=24, heads=16,
                         hidden_size=1024, ffn_size=4096, max_sequence=708,
                         vocab_size=30000)


def toy_config(scheme: str = "concat_fusion", **overrides) -> EncoderConfig:
    """Small CPU-friendly config used by the acceptance suite."""
    cfg = EncoderConfig(scheme=scheme, layers=4, heads=4, hidden_size=128,
                        ffn_size=512, image_size=112, patch_size=16,
                        max_sequence=224, vocab_size=800)
    return replace(cfg, **overrides) if overrides else cfg


def tiny_config(scheme: str = "concat_fusion", **overrides) -> EncoderConfig:
    """Minimal config for gradient checks and shape tests."""
    cfg = EncoderConfig(scheme=scheme, layers=2, heads=2, hidden_size=16,
                        ffn_size=32, image_size=32, patch_size=16,
                        max_sequence=68, vocab_size=200, position_bins=50)
    return replace(cfg, **overrides) if overrides else cfg
