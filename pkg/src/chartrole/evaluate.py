"""Per-class precision/recall/F1 scoring and corpus evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from chartrole.corpus import Corpus
from chartrole.model.net import RoleEncoder, collate
from chartrole.model.tokenizer import tokenize_blocks
from chartrole.model.vocab import Vocab
from chartrole.roles import ROLE_ORDER, TextRole, parse_role


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    per_class: dict[str, ClassScore]
    f1_macro: float
    f1_micro: float
    n: int
    macro_over: str = "present"  # present | all
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "f1_macro": self.f1_macro,
            "f1_micro": self.f1_micro,
            "n": self.n,
            "macro_over": self.macro_over,
            "per_class": {k: vars(v) for k, v in self.per_class.items()},
            "metadata": self.metadata,
        }

    def summary(self) -> str:
        lines = [f"n={self.n}  F1-macro={self.f1_macro:.2f}  F1-micro={self.f1_micro:.2f}"]
        for name, s in self.per_class.items():
            lines.append(f"  {name:<14} P={s.precision:6.2f} R={s.recall:6.2f} "
                         f"F1={s.f1:6.2f} (n={s.support})")
        return "\n".join(lines)


def f1_scores(gold: list[TextRole], pred: list[TextRole], *,
              macro_over: str = "present") -> EvalReport:
    """Scores in percent; per-class zero divisions count as 0.

    F1-macro averages the per-class scores -- over classes present in the
    gold labels by default, or over all nine classes with macro_over="all".
    F1-micro is the score over all samples, which for single-label
    classification equals accuracy.
    """
    if len(gold) != len(pred) or not gold:
        raise ValueError(f"need equal non-empty gold/pred, got {len(gold)}/{len(pred)}")
    if macro_over not in ("present", "all"):
        raise ValueError(f"macro_over must be 'present' or 'all', got {macro_over!r}")

    per_class: dict[str, ClassScore] = {}
    f1s = []
    for role in ROLE_ORDER:
        tp = sum(1 for g, p in zip(gold, pred) if g == role and p == role)
        fp = sum(1 for g, p in zip(gold, pred) if g != role and p == role)
        fn = sum(1 for g, p in zip(gold, pred) if g == role and p != role)
        support = tp + fn
        prec = 100.0 * tp / (tp + fp) if tp + fp else 0.0
        rec = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_class[role.value] = ClassScore(prec, rec, f1, support)
        if macro_over == "all" or support > 0:
            f1s.append(f1)

    micro = 100.0 * sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)
    macro = float(np.mean(f1s)) if f1s else 0.0
    return EvalReport(per_class, macro, micro, len(gold), macro_over)


# -- prediction records -------------------------------------------------------

@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    block_id: int
    pred: TextRole
    gold: TextRole | None


def predict_corpus(model: RoleEncoder, vocab: Vocab, corpus: Corpus,
                   split: str | None = None, batch_size: int = 16,
                   ) -> list[PredictionRecord]:
    """Per-block argmax predictions over a split, in corpus order."""
    samples = corpus.split_samples(split)
    records: list[PredictionRecord] = []
    for lo in range(0, len(samples), batch_size):
        chunk = [tokenize_blocks(s, vocab, model.config)
                 for s in samples[lo:lo + batch_size]]
        chunk = [t for t in chunk if t.spans]
        if not chunk:
            continue
        batch = collate(chunk, model.config)
        logits, _ = model.forward(batch)
        top = np.argmax(logits, axis=1)
        for (sid, bid), klass, lab in zip(batch.keys, top, batch.labels):
            records.append(PredictionRecord(
                sid, bid, ROLE_ORDER[int(klass)],
                ROLE_ORDER[int(lab)] if lab >= 0 else None))
    return records


def score_records(records: list[PredictionRecord], *,
                  macro_over: str = "present") -> EvalReport:
    labeled = [r for r in records if r.gold is not None]
    if not labeled:
        raise ValueError("no labeled blocks to score")
    return f1_scores([r.gold for r in labeled], [r.pred for r in labeled],
                     macro_over=macro_over)


def evaluate(model: RoleEncoder, vocab: Vocab, corpus: Corpus,
             split: str | None = None, *, macro_over: str = "present",
             batch_size: int = 16) -> tuple[EvalReport, list[PredictionRecord]]:
    records = predict_corpus(model, vocab, corpus, split, batch_size)
    report = score_records(records, macro_over=macro_over)
    report.metadata["corpus"] = corpus.name
    report.metadata["split"] = split
    return report, records


# -- prediction files ---------------------------------------------------------

def write_predictions(path: str | Path, records: list[PredictionRecord]) -> None:
    """One JSON record per line; deterministic bytes for identical inputs."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "sample_id": r.sample_id,
                "block_id": r.block_id,
                "pred": r.pred.value,
                "gold": r.gold.value if r.gold else None,
            }, sort_keys=True) + "\n")


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            records.append(PredictionRecord(
                doc["sample_id"], int(doc["block_id"]), parse_role(doc["pred"]),
                parse_role(doc["gold"]) if doc.get("gold") else None))
    return records


def compare_corpora(gold: Corpus, pred: Corpus, *,
                    macro_over: str = "present") -> EvalReport:
    """Score one corpus's role labels against another's, matching block ids."""
    g, p = [], []
    for sample in gold.samples:
        other = pred.get(sample.sample_id)
        for block in sample.blocks:
            if block.role is None:
                continue
            g.append(block.role)
            p.append(other.block(block.block_id).role)
    return f1_scores(g, p, macro_over=macro_over)
