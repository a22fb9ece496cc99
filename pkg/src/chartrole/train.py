"""Training: Adam with linear warmup, optional augmentation/balancing, runs
persisted to directories keyed by config hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from chartrole.augment import DEFAULT_TRAIN_METHODS, augment_corpus, derive_seed
from chartrole.balancing import class_weights, cutout_corpus
from chartrole.corpus import Corpus, class_distribution, corpus_fingerprint
from chartrole.evaluate import EvalReport, evaluate
from chartrole.model.config import EncoderConfig
from chartrole.model.checkpoint import save_checkpoint
from chartrole.model.net import RoleEncoder, collate
from chartrole.model.tokenizer import tokenize_blocks
from chartrole.model.vocab import Vocab


@dataclass(frozen=True)
class DabConfig:
    augment: bool = False
    methods: tuple[str, ...] = DEFAULT_TRAIN_METHODS
    cutout: bool = False
    weighted_ce: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "DabConfig":
        d = dict(d)
        if "methods" in d:
            d["methods"] = tuple(d["methods"])
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    batch_size: int = 8
    learning_rate: float = 3e-4
    warmup_steps: int = 50
    weight_decay: float = 0.0
    max_steps: int = 500
    adam_betas: tuple[float, float] = (0.9, 0.98)
    seed: int = 0
    dab: DabConfig = field(default_factory=DabConfig)
    eval_every: int = 0  # 0: evaluate only at the end
    macro_over: str = "present"

    def __post_init__(self):
        if self.max_steps <= 0 or self.batch_size <= 0:
            raise ValueError("max_steps and batch_size must be positive")
        b1, b2 = self.adam_betas
        if not (0.0 < b1 < 1.0 and 0.0 < b2 < 1.0):
            raise ValueError(f"adam betas must lie in (0, 1), got {self.adam_betas}")
        if self.warmup_steps < 0 or self.learning_rate <= 0:
            raise ValueError("need warmup_steps >= 0 and learning_rate > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "encoder" in d and isinstance(d["encoder"], dict):
            d["encoder"] = EncoderConfig(**d["encoder"])
        if "dab" in d and isinstance(d["dab"], dict):
            d["dab"] = DabConfig.from_dict(d["dab"])
        if "adam_betas" in d:
            d["adam_betas"] = tuple(d["adam_betas"])
        return cls(**d)


def config_hash(config: TrainConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def preset(name: str) -> TrainConfig:
    """Named reference configurations, full-scale and toy."""
    from chartrole.model.config import full_concat_fusion, full_layout_induced, toy_config

    presets = {
        "scheme-A/ICPR22": TrainConfig(encoder=full_concat_fusion(), batch_size=32,
                                       learning_rate=2e-5, warmup_steps=0,
                                       weight_decay=0.0, max_steps=10_000),
        "scheme-B/ICPR22": TrainConfig(encoder=full_layout_induced(), batch_size=16,
                                       learning_rate=2e-4, warmup_steps=1_000,
                                       weight_decay=1e-2, max_steps=20_000),
        "toy/concat_fusion": TrainConfig(encoder=toy_config("concat_fusion"),
                                         batch_size=8, learning_rate=1e-3,
                                         warmup_steps=50, max_steps=1_200),
        "toy/layout_induced": TrainConfig(encoder=toy_config("layout_induced"),
                                          batch_size=8, learning_rate=1e-3,
                                          warmup_steps=50, max_steps=1_200),
    }
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; have {sorted(presets)}")
    return presets[name]


class Adam:
    def __init__(self, params: dict, betas=(0.9, 0.98), eps=1e-8, weight_decay=0.0):
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v, dtype=np.float64) for k, v in params.items()}
        self.v = {k: np.zeros_like(v, dtype=np.float64) for k, v in params.items()}

    def step(self, params: dict, grads: dict, lr: float) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t
        for k, p in params.items():
            gk = grads[k].astype(np.float64)
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * gk
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * gk * gk
            update = (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)
            if self.weight_decay and p.ndim > 1:  # decoupled decay, matrices only
                update = update + self.weight_decay * p
            params[k] = (p - lr * update).astype(p.dtype)


def lr_at(step: int, config: TrainConfig) -> float:
    """Linear warmup to the configured rate, constant afterwards."""
    if config.warmup_steps > 0 and step < config.warmup_steps:
        return config.learning_rate * (step + 1) / config.warmup_steps
    return config.learning_rate


def apply_dab(corpus: Corpus, dab: DabConfig, seed: int) -> Corpus:
    """Concatenate the original corpus with its augmented/cutout copies."""
    if not (dab.augment or dab.cutout):
        return corpus
    samples = list(corpus.samples)
    if dab.augment:
        aug = augment_corpus(corpus, dab.methods, derive_seed(seed, "dab-aug"))
        samples += list(aug.samples[len(corpus):])
    if dab.cutout:
        cut = cutout_corpus(corpus, derive_seed(seed, "dab-cut"))
        samples += list(cut.samples[len(corpus):])
    return Corpus(corpus.name + "+dab", tuple(samples))


@dataclass
class TrainResult:
    model: RoleEncoder
    vocab: Vocab
    curves: dict
    run_dir: Path | None
    checkpoint_dir: Path | None
    val_report: EvalReport | None


class NonFiniteLossError(RuntimeError):
    def __init__(self, step: int, sample_ids: list[str]):
        self.step = step
        self.sample_ids = sample_ids
        super().__init__(f"non-finite loss at step {step}; offending batch: {sample_ids}")


def train(config: TrainConfig, train_corpus: Corpus,
          val_corpus: Corpus | None = None,
          out_dir: str | Path | None = None) -> TrainResult:
    """Seed-deterministic training run; persists checkpoint and curves when
    out_dir is given."""
    if len(train_corpus) == 0:
        raise ValueError("train corpus is empty")
    corpus = apply_dab(train_corpus, config.dab, config.seed)

    vocab = Vocab.build((b.text for s in corpus.samples for b in s.blocks),
                        max_words=config.encoder.vocab_size)
    tokenized = [tokenize_blocks(s, vocab, config.encoder) for s in corpus.samples]
    usable = [t for t in tokenized if t.spans and np.any(t.labels >= 0)]
    if not usable:
        raise ValueError("no labeled blocks available for training")

    weights = None
    if config.dab.weighted_ce:
        weights = class_weights(class_distribution(corpus)).w

    model = RoleEncoder(config.encoder, len(vocab),
                        seed=derive_seed(config.seed, "init"))
    optimizer = Adam(model.params, config.adam_betas, weight_decay=config.weight_decay)
    rng = np.random.default_rng(derive_seed(config.seed, "batches"))

    run_dir = Path(out_dir) / f"run-{config_hash(config)}" if out_dir else None
    order: list[int] = []
    losses: list[float] = []
    val_curve: list[tuple[int, float]] = []
    for step in range(config.max_steps):
        while len(order) < config.batch_size:
            order += list(rng.permutation(len(usable)))
        picks, order = order[:config.batch_size], order[config.batch_size:]
        batch = collate([usable[i] for i in picks], config.encoder)
        loss, grads, _ = model.loss_and_grads(batch, weights)
        if not np.isfinite(loss):
            err = NonFiniteLossError(step, [usable[i].sample_id for i in picks])
            if run_dir is not None:
                run_dir.mkdir(parents=True, exist_ok=True)
                (run_dir / "diagnostics.json").write_text(json.dumps({
                    "error": "non-finite loss",
                    "step": step,
                    "batch_sample_ids": err.sample_ids,
                    "recent_losses": losses[-20:],
                }, indent=1), encoding="utf-8")
            raise err
        optimizer.step(model.params, grads, lr_at(step, config))
        losses.append(loss)
        if (config.eval_every and val_corpus is not None
                and (step + 1) % config.eval_every == 0):
            report, _ = evaluate(model, vocab, val_corpus, macro_over=config.macro_over)
            val_curve.append((step + 1, report.f1_macro))

    val_report = None
    if val_corpus is not None:
        val_report, _ = evaluate(model, vocab, val_corpus, macro_over=config.macro_over)
        val_curve.append((config.max_steps, val_report.f1_macro))

    curves = {"loss": losses, "val_f1_macro": val_curve}
    ckpt_dir = None
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "train_config.json").write_text(
            json.dumps(config.to_dict(), indent=1, sort_keys=True), encoding="utf-8")
        (run_dir / "curves.json").write_text(json.dumps(curves), encoding="utf-8")
        ckpt_dir = save_checkpoint(run_dir / "checkpoint", model, vocab, meta={
            "steps": config.max_steps,
            "seed": config.seed,
            "corpus_fingerprint": corpus_fingerprint(corpus),
        })
        if val_report is not None:
            (run_dir / "val_report.json").write_text(
                json.dumps(val_report.to_dict(), indent=1), encoding="utf-8")
    return TrainResult(model, vocab, curves, run_dir, ckpt_dir, val_report)
