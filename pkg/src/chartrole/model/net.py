"""Toy-scale multimodal transformer encoder with hand-written backprop.

Both fusion schemes share one pre-LN encoder stack and a per-token linear
classifier head; per-block logits are pooled over each block's token span.

Scheme "concat_fusion": the sequence is all text tokens (token embedding +
within-block 1D position + quantized 2D position embeddings) concatenated
with all image patches (linear projection + patch position embedding).

Scheme "layout_induced": each text token is summed with the embedding of
the patch containing its bbox center, and only patches containing no bbox
center are appended, so the length is T + P - |patches with text|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chartrole.model.config import EncoderConfig
from chartrole.model.tokenizer import TokenizedSample

_LN_EPS = 1e-5
_NEG_INF = -1e9


@dataclass
class Batch:
    tok_ids: np.ndarray    # (B, S) int32
    pos1d: np.ndarray      # (B, S) int32
    coords: np.ndarray     # (B, S, 4) int32
    slot: np.ndarray       # (B, S) int32; patch index contributing here, -1 for none
    is_text: np.ndarray    # (B, S) bool
    valid: np.ndarray      # (B, S) bool
    patches: np.ndarray    # (B, P, Dp) float32
    spans: list            # (row, start, end) per block, batch order
    labels: np.ndarray     # (NB,) int64, -1 unlabeled
    keys: list             # (sample_id, block_id) per block
    seq_lens: list

    @property
    def size(self) -> tuple[int, int]:
        return self.tok_ids.shape


def collate(samples: list[TokenizedSample], config: EncoderConfig) -> Batch:
    """Assemble padded batch arrays laying out each sample's fused sequence."""
    rows = []
    for t in samples:
        T = t.n_tokens
        if config.scheme == "concat_fusion":
            free = np.arange(t.n_patches, dtype=np.int32)
            text_slot = np.full(T, -1, dtype=np.int32)
        else:
            used = t.text_patches
            free = np.array([p for p in range(t.n_patches) if p not in used],
                            dtype=np.int32)
            text_slot = t.token_patch.astype(np.int32)
        rows.append((t, text_slot, free, T + len(free)))

    B = len(rows)
    S = max((r[3] for r in rows), default=1)
    P = config.n_patches
    dp = 3 * config.patch_size * config.patch_size

    tok_ids = np.zeros((B, S), dtype=np.int32)
    pos1d = np.zeros((B, S), dtype=np.int32)
    coords = np.zeros((B, S, 4), dtype=np.int32)
    slot = np.full((B, S), -1, dtype=np.int32)
    is_text = np.zeros((B, S), dtype=bool)
    valid = np.zeros((B, S), dtype=bool)
    patches = np.zeros((B, P, dp), dtype=np.float32)
    spans, labels, keys, seq_lens = [], [], [], []

    for b, (t, text_slot, free, n) in enumerate(rows):
        T = t.n_tokens
        tok_ids[b, :T] = t.token_ids
        pos1d[b, :T] = t.pos1d
        coords[b, :T] = t.coords
        slot[b, :T] = text_slot
        is_text[b, :T] = True
        slot[b, T:n] = free
        valid[b, :n] = True
        patches[b] = t.patches
        seq_lens.append(n)
        for sp, lab in zip(t.spans, t.labels):
            spans.append((b, sp.start, sp.end))
            labels.append(int(lab))
            keys.append((t.sample_id, sp.block_id))

    return Batch(tok_ids, pos1d, coords, slot, is_text, valid, patches,
                 spans, np.asarray(labels, dtype=np.int64), keys, seq_lens)


def _gelu(x):
    u = 0.7978845608028654 * (x + 0.044715 * x * x * x)
    return 0.5 * x * (1.0 + np.tanh(u))


def _gelu_grad(x):
    t = np.tanh(0.7978845608028654 * (x + 0.044715 * x * x * x))
    du = 0.7978845608028654 * (1.0 + 3 * 0.044715 * x * x)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du


def _layernorm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv)


def _layernorm_grad(dy, g, cache):
    xhat, inv = cache
    n = xhat.shape[-1]
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = (inv / n) * (n * dxhat
                      - dxhat.sum(axis=-1, keepdims=True)
                      - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
    return dx, dg, db


def _softmax(x):
    m = x.max(axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=-1, keepdims=True)


class RoleEncoder:
    def __init__(self, config: EncoderConfig, vocab_len: int, seed: int = 0):
        self.config = config
        self.vocab_len = vocab_len
        self.params = self._init_params(np.random.default_rng(seed))

    # -- parameters -----------------------------------------------------------

    def _init_params(self, rng) -> dict[str, np.ndarray]:
        cfg = self.config
        dt = np.dtype(cfg.dtype)
        D, F, C = cfg.hidden_size, cfg.ffn_size, cfg.num_classes
        dp = 3 * cfg.patch_size * cfg.patch_size

        def normal(*shape):
            return (rng.standard_normal(shape) * 0.02).astype(dt)

        p = {
            "tok_emb": normal(self.vocab_len, D),
            "coord_emb": normal(4, cfg.position_bins, D),
            "patch_w": normal(dp, D),
            "patch_b": np.zeros(D, dtype=dt),
            "patch_pos": normal(cfg.n_patches, D),
            "final_ln_g": np.ones(D, dtype=dt),
            "final_ln_b": np.zeros(D, dtype=dt),
            "head_w": normal(D, C),
            "head_b": np.zeros(C, dtype=dt),
        }
        if cfg.scheme == "concat_fusion":
            p["pos1d_emb"] = normal(cfg.max_sequence, D)
        for i in range(cfg.layers):
            p[f"l{i}.ln1_g"] = np.ones(D, dtype=dt)
            p[f"l{i}.ln1_b"] = np.zeros(D, dtype=dt)
            p[f"l{i}.qkv_w"] = normal(D, 3 * D)
            p[f"l{i}.qkv_b"] = np.zeros(3 * D, dtype=dt)
            p[f"l{i}.out_w"] = normal(D, D)
            p[f"l{i}.out_b"] = np.zeros(D, dtype=dt)
            p[f"l{i}.ln2_g"] = np.ones(D, dtype=dt)
            p[f"l{i}.ln2_b"] = np.zeros(D, dtype=dt)
            p[f"l{i}.fc1_w"] = normal(D, F)
            p[f"l{i}.fc1_b"] = np.zeros(F, dtype=dt)
            p[f"l{i}.fc2_w"] = normal(F, D)
            p[f"l{i}.fc2_b"] = np.zeros(D, dtype=dt)
        return p

    def n_params(self) -> int:
        return int(sum(v.size for v in self.params.values()))

    # -- forward --------------------------------------------------------------

    def _embed(self, batch: Batch):
        cfg, p = self.config, self.params
        dt = np.dtype(cfg.dtype)
        B, S = batch.size
        patches = batch.patches.astype(dt)
        patch_emb = patches @ p["patch_w"] + p["patch_b"] + p["patch_pos"]  # (B,P,D)

        x = np.zeros((B, S, cfg.hidden_size), dtype=dt)
        it = batch.is_text
        text = p["tok_emb"][batch.tok_ids[it]].copy()
        coords_t = batch.coords[it]
        for c in range(4):
            text += p["coord_emb"][c][coords_t[:, c]]
        if cfg.scheme == "concat_fusion":
            text += p["pos1d_emb"][batch.pos1d[it]]
        x[it] = text

        has_slot = batch.slot >= 0
        rows, cols = np.nonzero(has_slot)
        x[rows, cols] += patch_emb[rows, batch.slot[rows, cols]]
        x[~batch.valid] = 0.0
        return x, (patches, patch_emb, has_slot)

    def forward(self, batch: Batch):
        """Returns (per-block logits (NB, C), cache for backward)."""
        cfg, p = self.config, self.params
        x, emb_cache = self._embed(batch)
        B, S = batch.size
        H, dh = cfg.heads, cfg.head_dim
        scale = 1.0 / np.sqrt(dh)
        kmask = batch.valid[:, None, None, :]

        layer_caches = []
        for i in range(cfg.layers):
            ln1, c1 = _layernorm(x, p[f"l{i}.ln1_g"], p[f"l{i}.ln1_b"])
            qkv = ln1 @ p[f"l{i}.qkv_w"] + p[f"l{i}.qkv_b"]
            q, k, v = [a.reshape(B, S, H, dh).transpose(0, 2, 1, 3)
                       for a in np.split(qkv, 3, axis=-1)]
            scores = (q @ k.transpose(0, 1, 3, 2)) * scale
            scores = np.where(kmask, scores, _NEG_INF)
            att = _softmax(scores)
            ctx = (att @ v).transpose(0, 2, 1, 3).reshape(B, S, -1)
            proj = ctx @ p[f"l{i}.out_w"] + p[f"l{i}.out_b"]
            x = x + proj

            ln2, c2 = _layernorm(x, p[f"l{i}.ln2_g"], p[f"l{i}.ln2_b"])
            pre = ln2 @ p[f"l{i}.fc1_w"] + p[f"l{i}.fc1_b"]
            act = _gelu(pre)
            ffn = act @ p[f"l{i}.fc2_w"] + p[f"l{i}.fc2_b"]
            x = x + ffn
            layer_caches.append((ln1, c1, q, k, v, att, ctx, ln2, c2, pre, act))

        y, cf = _layernorm(x, p["final_ln_g"], p["final_ln_b"])
        tok_logits = y @ p["head_w"] + p["head_b"]
        block_logits = self._pool(tok_logits, batch)
        cache = (batch, emb_cache, layer_caches, y, cf, tok_logits)
        return block_logits, cache

    def _pool(self, tok_logits, batch: Batch):
        cfg = self.config
        out = np.zeros((len(batch.spans), cfg.num_classes), dtype=tok_logits.dtype)
        for idx, (b, s, e) in enumerate(batch.spans):
            if e <= s:
                raise RuntimeError("empty block span: tokenization invariant breached")
            if cfg.pooling == "first":
                out[idx] = tok_logits[b, s]
            else:
                out[idx] = tok_logits[b, s:e].mean(axis=0)
        return out

    # -- backward -------------------------------------------------------------

    def backward(self, cache, dblock_logits) -> dict[str, np.ndarray]:
        cfg, p = self.config, self.params
        batch, emb_cache, layer_caches, y, cf, tok_logits = cache
        B, S = batch.size
        H, dh = cfg.heads, cfg.head_dim
        D = cfg.hidden_size
        scale = 1.0 / np.sqrt(dh)
        g = {k: np.zeros_like(v) for k, v in p.items()}

        dtok_logits = np.zeros_like(tok_logits)
        for idx, (b, s, e) in enumerate(batch.spans):
            if cfg.pooling == "first":
                dtok_logits[b, s] += dblock_logits[idx]
            else:
                dtok_logits[b, s:e] += dblock_logits[idx] / (e - s)

        flat_y = y.reshape(-1, D)
        g["head_w"] += flat_y.T @ dtok_logits.reshape(-1, cfg.num_classes)
        g["head_b"] += dtok_logits.sum(axis=(0, 1))
        dy = dtok_logits @ p["head_w"].T
        dx, dg, db = _layernorm_grad(dy, p["final_ln_g"], cf)
        g["final_ln_g"] += dg
        g["final_ln_b"] += db

        for i in reversed(range(cfg.layers)):
            ln1, c1, q, k, v, att, ctx, ln2, c2, pre, act = layer_caches[i]

            # FFN branch
            dffn = dx
            g[f"l{i}.fc2_w"] += act.reshape(-1, cfg.ffn_size).T @ dffn.reshape(-1, D)
            g[f"l{i}.fc2_b"] += dffn.sum(axis=(0, 1))
            dact = dffn @ p[f"l{i}.fc2_w"].T
            dpre = dact * _gelu_grad(pre)
            g[f"l{i}.fc1_w"] += ln2.reshape(-1, D).T @ dpre.reshape(-1, cfg.ffn_size)
            g[f"l{i}.fc1_b"] += dpre.sum(axis=(0, 1))
            dln2 = dpre @ p[f"l{i}.fc1_w"].T
            dx2, dg2, db2 = _layernorm_grad(dln2, p[f"l{i}.ln2_g"], c2)
            g[f"l{i}.ln2_g"] += dg2
            g[f"l{i}.ln2_b"] += db2
            dx = dx + dx2

            # attention branch
            dproj = dx
            g[f"l{i}.out_w"] += ctx.reshape(-1, D).T @ dproj.reshape(-1, D)
            g[f"l{i}.out_b"] += dproj.sum(axis=(0, 1))
            dctx = (dproj @ p[f"l{i}.out_w"].T).reshape(B, S, H, dh).transpose(0, 2, 1, 3)
            datt = dctx @ v.transpose(0, 1, 3, 2)
            dv = att.transpose(0, 1, 3, 2) @ dctx
            dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
            dq = (dscores @ k) * scale
            dk = (dscores.transpose(0, 1, 3, 2) @ q) * scale
            dqkv = np.concatenate(
                [a.transpose(0, 2, 1, 3).reshape(B, S, -1) for a in (dq, dk, dv)],
                axis=-1)
            g[f"l{i}.qkv_w"] += ln1.reshape(-1, D).T @ dqkv.reshape(-1, 3 * D)
            g[f"l{i}.qkv_b"] += dqkv.sum(axis=(0, 1))
            dln1 = dqkv @ p[f"l{i}.qkv_w"].T
            dx1, dg1, db1 = _layernorm_grad(dln1, p[f"l{i}.ln1_g"], c1)
            g[f"l{i}.ln1_g"] += dg1
            g[f"l{i}.ln1_b"] += db1
            dx = dx + dx1

        self._embed_backward(batch, emb_cache, dx, g)
        return g

    def _embed_backward(self, batch: Batch, emb_cache, dx, g):
        cfg = self.config
        patches, patch_emb, has_slot = emb_cache
        dx = dx.copy()
        dx[~batch.valid] = 0.0

        it = batch.is_text
        dtext = dx[it]
        np.add.at(g["tok_emb"], batch.tok_ids[it], dtext)
        for c in range(4):
            np.add.at(g["coord_emb"][c], batch.coords[it][:, c], dtext)
        if cfg.scheme == "concat_fusion":
            np.add.at(g["pos1d_emb"], batch.pos1d[it], dtext)

        dpe = np.zeros_like(patch_emb)
        rows, cols = np.nonzero(has_slot)
        np.add.at(dpe, (rows, batch.slot[rows, cols]), dx[rows, cols])
        dp_flat = dpe.reshape(-1, cfg.hidden_size)
        g["patch_w"] += patches.reshape(-1, patches.shape[-1]).T @ dp_flat
        g["patch_b"] += dp_flat.sum(axis=0)
        g["patch_pos"] += dpe.sum(axis=0)

    # -- loss -----------------------------------------------------------------

    def loss_and_grads(self, batch: Batch, weights: np.ndarray | None = None):
        """Weighted softmax cross-entropy over labeled blocks; returns
        (loss, grads, block_logits)."""
        block_logits, cache = self.forward(batch)
        labeled = batch.labels >= 0
        if not labeled.any():
            raise ValueError("batch contains no labeled blocks")
        z = block_logits[labeled].astype(np.float64)
        yidx = batch.labels[labeled]
        zmax = z.max(axis=1, keepdims=True)
        logp = z - zmax - np.log(np.exp(z - zmax).sum(axis=1, keepdims=True))
        wvec = np.ones(len(yidx)) if weights is None else np.asarray(weights)[yidx]
        n = len(yidx)
        loss = float((-logp[np.arange(n), yidx] * wvec).mean())

        dz = np.exp(logp)
        dz[np.arange(n), yidx] -= 1.0
        dz *= (wvec / n)[:, None]
        dblock = np.zeros_like(block_logits)
        dblock[labeled] = dz.astype(block_logits.dtype)
        grads = self.backward(cache, dblock)
        return loss, grads, block_logits


# -- spec-level fusion entry points -------------------------------------------

def _fuse(model: RoleEncoder, tokenized: TokenizedSample) -> np.ndarray:
    batch = collate([tokenized], model.config)
    x, _ = model._embed(batch)
    return x[0, :batch.seq_lens[0]]


def concat_fuse(model: RoleEncoder, tokenized: TokenizedSample) -> np.ndarray:
    """Scheme-A encoder input: text embeddings then all patch embeddings."""
    if model.config.scheme != "concat_fusion":
        raise ValueError("model is not configured for concat fusion")
    return _fuse(model, tokenized)


def layout_induced_fuse(model: RoleEncoder, tokenized: TokenizedSample) -> np.ndarray:
    """Scheme-B encoder input: joint text+patch embeddings then text-free patches."""
    if model.config.scheme != "layout_induced":
        raise ValueError("model is not configured for layout-induced fusion")
    return _fuse(model, tokenized)


def encode_classify(model: RoleEncoder, tokenized: TokenizedSample) -> np.ndarray:
    """Per-block logits (n_blocks, 9) for one prepared sample."""
    if not tokenized.spans:
        return np.zeros((0, model.config.num_classes), dtype=np.float32)
    logits, _ = model.forward(collate([tokenized], model.config))
    return logits
