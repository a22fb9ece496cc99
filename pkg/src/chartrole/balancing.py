"""Class balancing: inverse-frequency loss weights and role-targeted cutout."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from chartrole.corpus import ChartSample, Corpus
from chartrole.roles import NUM_ROLES, ROLE_INDEX, ROLE_ORDER, TextRole


@dataclass(frozen=True)
class ClassWeights:
    """Per-role loss weights in ROLE_ORDER."""

    w: np.ndarray

    def __post_init__(self):
        if self.w.shape != (NUM_ROLES,) or not np.all(self.w > 0):
            raise ValueError("expected 9 positive weights")

    def of(self, role: TextRole) -> float:
        return float(self.w[ROLE_INDEX[role]])

    def as_dict(self) -> dict[str, float]:
        return {r.value: float(v) for r, v in zip(ROLE_ORDER, self.w)}


def class_weights(histogram: dict) -> ClassWeights:
    """w_c = N / (K * n_c), K = number of non-empty classes.

    A uniform histogram yields unit weights; minority classes get larger
    weights. Classes with zero count take the maximum computed weight.
    """
    counts = np.array([histogram.get(r, 0) for r in ROLE_ORDER], dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram must contain at least one count")
    k = int((counts > 0).sum())
    w = np.where(counts > 0, total / (k * np.maximum(counts, 1.0)), 0.0)
    w[counts == 0] = w.max()
    return ClassWeights(w)


def weighted_cross_entropy(logits, labels, weights: ClassWeights | None = None) -> float:
    """Mean over blocks of w_label * (-log softmax(logits)[label]).

    Unit weights reduce it to the standard cross-entropy.
    """
    z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    idx = np.array([ROLE_INDEX[r] if isinstance(r, TextRole) else int(r) for r in np.atleast_1d(labels)])
    if z.shape[0] != idx.shape[0]:
        raise ValueError("one logits row per label required")
    zmax = z.max(axis=1, keepdims=True)
    logp = z - zmax - np.log(np.exp(z - zmax).sum(axis=1, keepdims=True))
    nll = -logp[np.arange(len(idx)), idx]
    if weights is not None:
        nll = nll * weights.w[idx]
    return float(nll.mean())


@dataclass(frozen=True)
class CutoutPlan:
    target_class: TextRole
    n_masks: int
    masked_block_ids: tuple[int, ...]
    mask_color: tuple[int, int, int]

    def __post_init__(self):
        if self.n_masks != len(self.masked_block_ids):
            raise ValueError("n_masks must equal the number of masked blocks")


def cutout_sample(sample: ChartSample, class_histogram: dict, seed: int,
                  mask_color: tuple[int, int, int] | None = None,
                  ) -> tuple[ChartSample, CutoutPlan]:
    """Mask the bbox regions of one sampled role class.

    The target class is drawn proportionally to its corpus-level count among
    the classes present in this sample; the number of masked blocks is
    uniform on {1..count of that class here}. Annotations are unchanged; the
    default mask color is the mean image color.
    """
    labeled = [b for b in sample.blocks if b.role is not None]
    if not labeled:
        raise ValueError(f"sample {sample.sample_id} has no labeled blocks")
    rng = np.random.default_rng(seed)

    present = sorted({b.role for b in labeled}, key=lambda r: ROLE_INDEX[r])
    weights = np.array([class_histogram.get(r, 0) for r in present], dtype=np.float64)
    probs = weights / weights.sum() if weights.sum() > 0 else np.full(len(present), 1.0 / len(present))
    target = present[int(rng.choice(len(present), p=probs))]

    candidates = sorted(b.block_id for b in labeled if b.role == target)
    n_masks = int(rng.integers(1, len(candidates) + 1))
    chosen = sorted(int(i) for i in rng.choice(candidates, size=n_masks, replace=False))

    if mask_color is None:
        mean = np.rint(sample.image.reshape(-1, 3).mean(axis=0)).astype(np.uint8)
        mask_color = (int(mean[0]), int(mean[1]), int(mean[2]))

    image = sample.image.copy()
    h, w = image.shape[:2]
    for bid in chosen:
        bb = sample.block(bid).bbox
        x0, y0 = int(np.floor(bb.x)), int(np.floor(bb.y))
        x1, y1 = int(np.ceil(bb.x2)), int(np.ceil(bb.y2))
        image[max(y0, 0):min(y1, h), max(x0, 0):min(x1, w)] = mask_color

    plan = CutoutPlan(target, n_masks, tuple(chosen), mask_color)
    return replace(sample, image=image), plan


def cutout_corpus(corpus: Corpus, seed: int) -> Corpus:
    """Original corpus concatenated with one cutout copy per sample."""
    from chartrole.augment import derive_seed
    from chartrole.corpus import class_distribution

    hist = class_distribution(corpus)
    extras = []
    for sample in corpus.samples:
        out, _ = cutout_sample(sample, hist, derive_seed(seed, sample.sample_id, "cutout"))
        extras.append(replace(out, sample_id=sample.sample_id + "-cut",
                              provenance=sample.provenance + "+cut"))
    return Corpus(corpus.name, tuple(corpus.samples) + tuple(extras))
