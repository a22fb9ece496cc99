"""Checkpoint directories: config + vocabulary + weights + metadata."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from chartrole.model.config import EncoderConfig
from chartrole.model.net import RoleEncoder
from chartrole.model.vocab import Vocab

FORMAT_TAG = "chartrole-ckpt-v1"


def save_checkpoint(directory: str | Path, model: RoleEncoder, vocab: Vocab,
                    meta: dict | None = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.json").write_text(model.config.to_json(), encoding="utf-8")
    (d / "vocab.json").write_text(vocab.to_json(), encoding="utf-8")
    np.savez(d / "weights.npz", **model.params)
    record = {"format": FORMAT_TAG, "vocab_len": len(vocab)}
    record.update(meta or {})
    (d / "meta.json").write_text(json.dumps(record, indent=1, sort_keys=True),
                                 encoding="utf-8")
    return d


def load_checkpoint(directory: str | Path) -> tuple[RoleEncoder, Vocab, dict]:
    d = Path(directory)
    meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
    if meta.get("format") != FORMAT_TAG:
        raise ValueError(f"{d}: unsupported checkpoint format {meta.get('format')!r}")
    config = EncoderConfig.from_json((d / "config.json").read_text(encoding="utf-8"))
    vocab = Vocab.from_json((d / "vocab.json").read_text(encoding="utf-8"))
    model = RoleEncoder(config, len(vocab), seed=0)
    with np.load(d / "weights.npz") as store:
        for name, value in model.params.items():
            if name not in store:
                raise ValueError(f"{d}: checkpoint missing tensor {name}")
            if store[name].shape != value.shape:
                raise ValueError(f"{d}: tensor {name} has shape {store[name].shape}, "
                                 f"config implies {value.shape}")
            model.params[name] = store[name]
    return model, vocab, meta
