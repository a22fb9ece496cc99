import numpy as np
import pytest

from chartrole.corpus import Corpus, TextBlock
from chartrole.geometry import BoundingBox
from chartrole.model.config import (EncoderConfig, full_concat_fusion,
                                    full_layout_induced, tiny_config)
from chartrole.model.net import (RoleEncoder, collate, concat_fuse, encode_classify,
                                 layout_induced_fuse)
from chartrole.model.checkpoint import load_checkpoint, save_checkpoint
from chartrole.model.tokenizer import tokenize_blocks
from chartrole.model.vocab import Vocab
from chartrole.roles import ROLE_ORDER, TextRole
from chartrole.synth import ChartSpec, generate_chart

from conftest import make_sample


def _random_tokenized(rng, cfg, n_blocks=None, sample_id="r"):
    w, h = 64, 48
    n_blocks = n_blocks if n_blocks is not None else int(rng.integers(1, 8))
    blocks = []
    for i in range(n_blocks):
        x = float(rng.uniform(0, w - 6))
        y = float(rng.uniform(0, h - 6))
        text = "".join(rng.choice(list("abc 12"), size=int(rng.integers(1, 7))))
        text = text.strip() or "a"
        blocks.append(TextBlock(i, text, BoundingBox(x, y, 5, 5),
                                ROLE_ORDER[int(rng.integers(0, 9))]))
    sample = make_sample(sample_id=sample_id, size=(w, h), blocks=tuple(blocks))
    vocab = Vocab.build([b.text for b in blocks])
    return tokenize_blocks(sample, vocab, cfg), vocab


def test_config_invariants():
    with pytest.raises(ValueError):
        EncoderConfig(hidden_size=130, heads=4)
    with pytest.raises(ValueError):
        EncoderConfig(image_size=100, patch_size=16)
    a = full_concat_fusion()
    assert (a.layers, a.heads, a.hidden_size, a.ffn_size) == (12, 12, 768, 3072)
    b = full_layout_induced()
    assert (b.layers, b.heads, b.hidden_size, b.ffn_size) == (24, 16, 1024, 4096)


def test_scheme_a_length_is_tokens_plus_patches():
    rng = np.random.default_rng(0)
    cfg = tiny_config("concat_fusion")
    for _ in range(50):
        t, _ = _random_tokenized(rng, cfg)
        assert t.fused_length("concat_fusion") == t.n_tokens + t.n_patches
        model = RoleEncoder(cfg, 60, seed=0)
        seq = concat_fuse(model, t)
        assert seq.shape == (t.n_tokens + t.n_patches, cfg.hidden_size)


def test_scheme_b_length_identity():
    rng = np.random.default_rng(1)
    cfg = tiny_config("layout_induced")
    for _ in range(50):
        t, _ = _random_tokenized(rng, cfg)
        want = t.n_tokens + t.n_patches - len(t.text_patches)
        model = RoleEncoder(cfg, 60, seed=0)
        seq = layout_induced_fuse(model, t)
        assert seq.shape[0] == want == t.fused_length("layout_induced")


def test_zero_tokens_pure_patch_sequence():
    cfg = tiny_config("concat_fusion")
    sample = make_sample(blocks=())
    t = tokenize_blocks(sample, Vocab.build(["x"]), cfg)
    model = RoleEncoder(cfg, 10, seed=0)
    assert concat_fuse(model, t).shape == (cfg.n_patches, cfg.hidden_size)
    cfg_b = tiny_config("layout_induced")
    t = tokenize_blocks(sample, Vocab.build(["x"]), cfg_b)
    model = RoleEncoder(cfg_b, 10, seed=0)
    assert layout_induced_fuse(model, t).shape == (cfg_b.n_patches, cfg_b.hidden_size)


def test_fuse_scheme_mismatch_rejected():
    cfg = tiny_config("concat_fusion")
    model = RoleEncoder(cfg, 10, seed=0)
    t = tokenize_blocks(make_sample(), Vocab.build(["Title", "x"]), cfg)
    with pytest.raises(ValueError):
        layout_induced_fuse(model, t)


def test_one_logit_vector_per_block(synth_chart):
    for scheme in ("concat_fusion", "layout_induced"):
        cfg = tiny_config(scheme, max_sequence=300)
        vocab = Vocab.build([b.text for b in synth_chart.blocks])
        t = tokenize_blocks(synth_chart, vocab, cfg)
        model = RoleEncoder(cfg, len(vocab), seed=1)
        logits = encode_classify(model, t)
        assert logits.shape == (len(synth_chart.blocks), 9)
        again = encode_classify(model, t)
        assert np.array_equal(logits, again)  # inference determinism


def test_permutation_consistency_scheme_a():
    """Shuffling block order (positions intact) leaves pooled logits unchanged."""
    rng = np.random.default_rng(7)
    cfg = tiny_config("concat_fusion")
    blocks = []
    for i in range(6):
        blocks.append(TextBlock(i, f"t{i}", BoundingBox(3 + 7 * i, 4 + 3 * i, 6, 5),
                                ROLE_ORDER[i % 9]))
    sample = make_sample(blocks=tuple(blocks))
    vocab = Vocab.build([b.text for b in blocks])
    model = RoleEncoder(cfg, len(vocab), seed=3)

    base = tokenize_blocks(sample, vocab, cfg)
    base_logits = {s.block_id: encode_classify(model, base)[i]
                   for i, s in enumerate(base.spans)}

    perm = list(rng.permutation(6))
    shuffled = sample.with_blocks(tuple(blocks[int(j)] for j in perm))
    t2 = tokenize_blocks(shuffled, vocab, cfg)
    logits2 = encode_classify(model, t2)
    for i, span in enumerate(t2.spans):
        np.testing.assert_allclose(logits2[i], base_logits[span.block_id],
                                   rtol=0, atol=1e-5)


def test_gradient_check_both_schemes():
    """Central finite differences vs analytic gradients on sampled parameters,
    relative error < 1e-3 (2 layers, D=16, float64)."""
    rng = np.random.default_rng(0)
    for scheme in ("concat_fusion", "layout_induced"):
        cfg = tiny_config(scheme, dtype="float64")
        charts = [generate_chart(ChartSpec(seed=s, canvas=(180, 140),
                                           x_ticks=3, y_ticks=3))
                  for s in (1, 2)]
        vocab = Vocab.build([b.text for c in charts for b in c.blocks])
        toks = [tokenize_blocks(c, vocab, cfg) for c in charts]
        model = RoleEncoder(cfg, len(vocab), seed=0)
        batch = collate(toks, cfg)
        _, grads, _ = model.loss_and_grads(batch)

        checked = 0
        for name, p in model.params.items():
            for _ in range(3):
                idx = tuple(rng.integers(0, s) for s in p.shape)
                eps = 1e-6
                orig = p[idx]
                p[idx] = orig + eps
                lp, _, _ = model.loss_and_grads(batch)
                p[idx] = orig - eps
                lm, _, _ = model.loss_and_grads(batch)
                p[idx] = orig
                fd = (lp - lm) / (2 * eps)
                an = grads[name][idx]
                denom = max(abs(fd), abs(an), 1e-6)
                assert abs(fd - an) / denom < 1e-3, (scheme, name, idx, fd, an)
                checked += 1
        assert checked >= 50


def test_overfit_single_repeated_sample():
    """Training to convergence on one repeated chart recovers its gold roles."""
    from chartrole.train import TrainConfig, train

    chart = generate_chart(ChartSpec(seed=23, canvas=(200, 160)))
    corpus = Corpus("one", (chart,))
    cfg = TrainConfig(encoder=tiny_config("concat_fusion", max_sequence=260,
                                          image_size=32),
                      batch_size=2, learning_rate=3e-3, warmup_steps=10,
                      max_steps=220, seed=1)
    result = train(cfg, corpus)
    t = tokenize_blocks(chart, result.vocab, cfg.encoder)
    logits = encode_classify(result.model, t)
    pred = [ROLE_ORDER[int(i)] for i in logits.argmax(axis=1)]
    gold = [b.role for b in chart.blocks]
    assert pred == gold


def test_checkpoint_round_trip(tmp_path):
    cfg = tiny_config("layout_induced")
    vocab = Vocab.build(["alpha beta", "42"])
    model = RoleEncoder(cfg, len(vocab), seed=5)
    save_checkpoint(tmp_path / "ckpt", model, vocab, meta={"steps": 7})
    loaded, vocab2, meta = load_checkpoint(tmp_path / "ckpt")
    assert meta["steps"] == 7
    assert vocab2.itos == vocab.itos
    assert loaded.config == cfg
    for k, v in model.params.items():
        assert np.array_equal(loaded.params[k], v)

    sample = make_sample(blocks=(TextBlock(0, "alpha", BoundingBox(1, 1, 10, 6),
                                           TextRole.OTHER),))
    t = tokenize_blocks(sample, vocab, cfg)
    np.testing.assert_array_equal(encode_classify(model, t),
                                  encode_classify(loaded, t))


def test_checkpoint_shape_mismatch_rejected(tmp_path):
    cfg = tiny_config()
    vocab = Vocab.build(["a"])
    model = RoleEncoder(cfg, len(vocab), seed=0)
    save_checkpoint(tmp_path / "c", model, vocab)
    # corrupt the stored config: more layers than the weights provide
    bigger = tiny_config(layers=3)
    (tmp_path / "c" / "config.json").write_text(bigger.to_json())
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "c")
