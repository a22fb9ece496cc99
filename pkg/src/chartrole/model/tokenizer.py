"""Sample preparation: resize, patch extraction, and block tokenization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chartrole.corpus import ChartSample
from chartrole.model.config import EncoderConfig
from chartrole.model.vocab import Vocab
from chartrole.roles import ROLE_INDEX


@dataclass(frozen=True)
class BlockSpan:
    block_id: int
    start: int
    end: int  # exclusive


@dataclass
class TokenizedSample:
    sample_id: str
    token_ids: np.ndarray        # (T,) int32
    pos1d: np.ndarray            # (T,) int32, restarts at 0 inside each block
    coords: np.ndarray           # (T, 4) int32 quantized x0,y0,x1,y1
    token_patch: np.ndarray      # (T,) int32 flat index of the bbox-center patch
    spans: list[BlockSpan]
    labels: np.ndarray           # (n_blocks,) int8, -1 when unlabeled
    dropped_blocks: list[int] = field(default_factory=list)
    patches: np.ndarray = None   # (P, 3*p*p) float32
    n_patches: int = 0

    @property
    def n_tokens(self) -> int:
        return int(self.token_ids.shape[0])

    @property
    def text_patches(self) -> frozenset:
        """Distinct patches containing the bbox center of a kept block."""
        return frozenset(int(self.token_patch[s.start]) for s in self.spans)

    def fused_length(self, scheme: str) -> int:
        if scheme == "concat_fusion":
            return self.n_tokens + self.n_patches
        return self.n_tokens + self.n_patches - len(self.text_patches)


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Pixel-center-aligned bilinear resize to the model's working resolution."""
    h, w = image.shape[:2]
    if (h, w) == (out_h, out_w):
        return image
    sy = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    sx = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    sy = np.clip(sy, 0, h - 1)
    sx = np.clip(sx, 0, w - 1)
    y0 = sy.astype(np.int64)
    x0 = sx.astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    ay = (sy - y0)[:, None, None]
    ax = (sx - x0)[None, :, None]
    img = image.astype(np.float64)
    top = (1 - ax) * img[y0][:, x0] + ax * img[y0][:, x1]
    bot = (1 - ax) * img[y1][:, x0] + ax * img[y1][:, x1]
    return np.rint((1 - ay) * top + ay * bot).astype(np.uint8)


def patchify(image: np.ndarray, patch_size: int) -> np.ndarray:
    """Row-major sequence of flattened, intensity-centered patches."""
    h, w = image.shape[:2]
    if h % patch_size or w % patch_size:
        raise ValueError(f"patch size {patch_size} must divide image dims {w}x{h}")
    gh, gw = h // patch_size, w // patch_size
    x = image.astype(np.float32) / 255.0 - 0.5
    x = x.reshape(gh, patch_size, gw, patch_size, 3)
    return x.transpose(0, 2, 1, 3, 4).reshape(gh * gw, patch_size * patch_size * 3)


def quantize_bbox(bbox, image_size: tuple[int, int], bins: int) -> np.ndarray:
    w, h = image_size
    q = np.array([bbox.x / w, bbox.y / h, bbox.x2 / w, bbox.y2 / h]) * bins
    return np.clip(np.floor(q), 0, bins - 1).astype(np.int32)


def center_patch(bbox, image_size: tuple[int, int], config: EncoderConfig) -> int:
    """Flat patch index containing the bbox center in working coordinates.

    Half-open patch cells: a center exactly on a cell boundary floors into
    the cell that starts there; the bottom/right image edge clips into the
    last cell.
    """
    w, h = image_size
    cx, cy = bbox.center
    col = int(cx * config.image_size / w) // config.patch_size
    row = int(cy * config.image_size / h) // config.patch_size
    col = min(max(col, 0), config.grid - 1)
    row = min(max(row, 0), config.grid - 1)
    return row * config.grid + col


def tokenize_blocks(sample: ChartSample, vocab: Vocab,
                    config: EncoderConfig) -> TokenizedSample:
    """Tokenize every block, then truncate whole blocks off the tail to fit
    the text budget (max_sequence minus the patch count)."""
    size = sample.size
    work = resize_bilinear(sample.image, config.image_size, config.image_size)
    patches = patchify(work, config.patch_size)

    ids: list[int] = []
    pos: list[int] = []
    coords: list[np.ndarray] = []
    tpatch: list[int] = []
    spans: list[BlockSpan] = []
    labels: list[int] = []
    dropped: list[int] = []
    budget = config.text_budget

    for i, block in enumerate(sample.blocks):
        tok = vocab.encode(block.text)
        if len(ids) + len(tok) > budget:
            dropped = [b.block_id for b in sample.blocks[i:]]
            break
        q = quantize_bbox(block.bbox, size, config.position_bins)
        patch = center_patch(block.bbox, size, config)
        start = len(ids)
        ids.extend(tok)
        pos.extend(min(j, config.max_sequence - 1) for j in range(len(tok)))
        coords.extend([q] * len(tok))
        tpatch.extend([patch] * len(tok))
        spans.append(BlockSpan(block.block_id, start, start + len(tok)))
        labels.append(ROLE_INDEX[block.role] if block.role is not None else -1)

    return TokenizedSample(
        sample_id=sample.sample_id,
        token_ids=np.asarray(ids, dtype=np.int32),
        pos1d=np.asarray(pos, dtype=np.int32),
        coords=(np.stack(coords).astype(np.int32) if coords
                else np.zeros((0, 4), dtype=np.int32)),
        token_patch=np.asarray(tpatch, dtype=np.int32),
        spans=spans,
        labels=np.asarray(labels, dtype=np.int8),
        dropped_blocks=dropped,
        patches=patches,
        n_patches=config.n_patches,
    )
