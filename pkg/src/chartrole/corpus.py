"""In-memory data model: text blocks, chart samples, corpora, and splits."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from chartrole.geometry import BoundingBox
from chartrole.roles import ROLE_ORDER, TextRole


@dataclass(frozen=True)
class TextBlock:
    block_id: int
    text: str
    bbox: BoundingBox
    role: TextRole | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"block {self.block_id} has empty text")


@dataclass(eq=False)
class ChartSample:
    sample_id: str
    image: np.ndarray  # (H, W, 3) uint8
    chart_type: str
    blocks: tuple[TextBlock, ...]
    provenance: str = ""

    def __post_init__(self):
        if not self.chart_type:
            raise ValueError(f"sample {self.sample_id}: chart_type must be non-empty")
        if self.image.ndim != 3 or self.image.shape[2] != 3 or self.image.dtype != np.uint8:
            raise ValueError(f"sample {self.sample_id}: image must be uint8 HxWx3")
        self.blocks = tuple(self.blocks)
        ids = [b.block_id for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise ValueError(f"sample {self.sample_id}: duplicate block ids")
        h, w = self.image.shape[:2]
        for b in self.blocks:
            if b.bbox.x < 0 or b.bbox.y < 0 or b.bbox.x2 > w + 1e-6 or b.bbox.y2 > h + 1e-6:
                raise ValueError(
                    f"sample {self.sample_id}: block {b.block_id} bbox {b.bbox} "
                    f"outside {w}x{h} image")

    @property
    def size(self) -> tuple[int, int]:
        """(width, height) in pixels."""
        return (self.image.shape[1], self.image.shape[0])

    def block(self, block_id: int) -> TextBlock:
        for b in self.blocks:
            if b.block_id == block_id:
                return b
        raise KeyError(f"sample {self.sample_id} has no block {block_id}")

    def with_blocks(self, blocks) -> "ChartSample":
        return replace(self, blocks=tuple(blocks))

    def fully_labeled(self) -> bool:
        return all(b.role is not None for b in self.blocks)


@dataclass(eq=False)
class Corpus:
    name: str
    samples: tuple[ChartSample, ...]
    splits: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.samples = tuple(self.samples)
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError(f"corpus {self.name}: duplicate sample ids")
        known = set(ids)
        seen: set[str] = set()
        for split, members in self.splits.items():
            members = tuple(members)
            self.splits[split] = members
            unknown = set(members) - known
            if unknown:
                raise ValueError(f"corpus {self.name}: split {split} references "
                                 f"unknown samples {sorted(unknown)}")
            overlap = seen & set(members)
            if overlap:
                raise ValueError(f"corpus {self.name}: splits overlap on {sorted(overlap)}")
            seen |= set(members)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def sample_ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]

    def get(self, sample_id: str) -> ChartSample:
        for s in self.samples:
            if s.sample_id == sample_id:
                return s
        raise KeyError(f"corpus {self.name} has no sample {sample_id}")

    def split_samples(self, split: str | None) -> list[ChartSample]:
        if split is None:
            return list(self.samples)
        if split not in self.splits:
            raise KeyError(f"corpus {self.name} has no split {split!r}")
        members = set(self.splits[split])
        return [s for s in self.samples if s.sample_id in members]

    def subset(self, sample_ids, name: str | None = None) -> "Corpus":
        wanted = set(sample_ids)
        return Corpus(name or self.name,
                      tuple(s for s in self.samples if s.sample_id in wanted))

    def view(self, split: str) -> "Corpus":
        return Corpus(f"{self.name}/{split}", tuple(self.split_samples(split)))


def class_distribution(corpus: Corpus, split: str | None = None) -> dict[TextRole, int]:
    """Role histogram over all labeled blocks of a split (whole corpus when None)."""
    hist = {r: 0 for r in ROLE_ORDER}
    for sample in corpus.split_samples(split):
        for b in sample.blocks:
            if b.role is not None:
                hist[b.role] += 1
    return hist


def _split_sizes(n: int, ratios: tuple[float, ...]) -> list[int]:
    # floor rounding, remainder assigned to the first split
    sizes = [int(n * r) for r in ratios]
    sizes[0] += n - sum(sizes)
    return sizes


def split_corpus(corpus: Corpus, ratios, seed: int,
                 names: tuple[str, ...] | None = None) -> list[Corpus]:
    """Deterministically partition a corpus into len(ratios) disjoint views."""
    ratios = tuple(float(r) for r in ratios)
    if any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    if len(corpus) == 0:
        raise ValueError("cannot split an empty corpus")
    if names is None:
        names = _default_split_names(len(ratios))

    order = np.random.default_rng(seed).permutation(len(corpus))
    sizes = _split_sizes(len(corpus), ratios)
    parts, start = [], 0
    for split_name, size in zip(names, sizes):
        chosen = {corpus.samples[i].sample_id for i in order[start:start + size]}
        parts.append(Corpus(f"{corpus.name}/{split_name}",
                            tuple(s for s in corpus.samples if s.sample_id in chosen)))
        start += size
    return parts


def assign_splits(corpus: Corpus, ratios, seed: int,
                  names: tuple[str, ...] | None = None) -> Corpus:
    """Same partition rule as split_corpus, recorded in corpus.splits."""
    names = names or _default_split_names(len(tuple(ratios)))
    parts = split_corpus(corpus, ratios, seed, names)
    splits = {name: tuple(p.sample_ids()) for name, p in zip(names, parts)}
    return Corpus(corpus.name, corpus.samples, splits)


def _default_split_names(k: int) -> tuple[str, ...]:
    if k == 2:
        return ("train", "test")
    if k == 3:
        return ("train", "val", "test")
    return tuple(f"split{i}" for i in range(k))


def corpus_fingerprint(corpus: Corpus) -> str:
    """Stable content hash over annotations and image bytes."""
    digest = hashlib.sha256()
    for s in sorted(corpus.samples, key=lambda s: s.sample_id):
        digest.update(s.sample_id.encode())
        digest.update(s.chart_type.encode())
        digest.update(hashlib.sha256(np.ascontiguousarray(s.image).tobytes()).digest())
        for b in s.blocks:
            digest.update(f"{b.block_id}|{b.text}|{b.bbox.as_dict()}|{b.role}".encode())
    return digest.hexdigest()
