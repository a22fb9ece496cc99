import math

import numpy as np
import pytest

from chartrole.augment import (ALPHABET, AugmentationRecipe, NOISY_POOL,
                               adjust_photometry, apply_image_noise, augment_corpus,
                               char_delete_prefix, char_insert, char_substitute,
                               make_noisy_corpus, rotate_sample)
from chartrole.corpus import Corpus, class_distribution
from chartrole.synth import ChartSpec, generate_chart, generate_corpus

from conftest import make_sample


# rotation ---------------------------------------------------------------------

def test_rotate_zero_is_bit_identity(synth_chart):
    out = rotate_sample(synth_chart, 0.0)
    assert np.array_equal(out.image, synth_chart.image)
    assert out.blocks == synth_chart.blocks


def _mask_containment(sample, theta):
    """Oracle: every non-background pixel center inside a block's bbox maps
    into the block's post-rotation bbox."""
    rotated = rotate_sample(sample, theta)
    w, h = sample.size
    cx, cy = w / 2.0, h / 2.0
    t = math.radians(theta)
    c, s = math.cos(t), math.sin(t)
    ow, oh = rotated.size
    offx, offy = ow / 2.0 - cx, oh / 2.0 - cy
    bg = np.all(sample.image == 255, axis=2)
    for before, after in zip(sample.blocks, rotated.blocks):
        bb = before.bbox
        x0, y0 = int(bb.x), int(bb.y)
        x1, y1 = int(np.ceil(bb.x2)), int(np.ceil(bb.y2))
        ys, xs = np.nonzero(~bg[y0:y1, x0:x1])
        px = xs + x0 + 0.5
        py = ys + y0 + 0.5
        qx = cx + (px - cx) * c + (py - cy) * s + offx
        qy = cy - (px - cx) * s + (py - cy) * c + offy
        nb = after.bbox
        if not (np.all(qx >= nb.x - 1e-6) and np.all(qx <= nb.x2 + 1e-6)
                and np.all(qy >= nb.y - 1e-6) and np.all(qy <= nb.y2 + 1e-6)):
            return False
    return True


def test_rotation_pixel_mask_containment():
    sample = generate_chart(ChartSpec(seed=17))
    for theta in (17.0, -30.0, 30.0, 5.5, -12.25):
        assert _mask_containment(sample, theta)


def test_rotate_90_bbox_matches_corner_oracle():
    sample = make_sample(size=(100, 100))
    out = rotate_sample(sample, 90.0)
    bb = sample.blocks[0].bbox
    cx = cy = 50.0
    corners = [(bb.x, bb.y), (bb.x2, bb.y), (bb.x2, bb.y2), (bb.x, bb.y2)]
    pts = [(cx + (x - cx) * math.cos(math.pi / 2) + (y - cy) * math.sin(math.pi / 2),
            cy - (x - cx) * math.sin(math.pi / 2) + (y - cy) * math.cos(math.pi / 2))
           for x, y in corners]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    got = out.blocks[0].bbox
    assert got.x == pytest.approx(min(xs), abs=1e-6)
    assert got.width == pytest.approx(max(xs) - min(xs), abs=1e-6)
    assert got.y == pytest.approx(min(ys), abs=1e-6)
    assert got.height == pytest.approx(max(ys) - min(ys), abs=1e-6)


def test_rotate_keeps_labels_and_ids(synth_chart):
    out = rotate_sample(synth_chart, -22.5)
    assert [(b.block_id, b.text, b.role) for b in out.blocks] == \
           [(b.block_id, b.text, b.role) for b in synth_chart.blocks]


# image noise -------------------------------------------------------------------

def test_salt_pepper_corruption_rate():
    # mid-gray canvas so both salt and pepper hits are visible
    sample = make_sample(size=(100, 100))
    img = np.full_like(sample.image, 128)
    sample = type(sample)(sample.sample_id, img, sample.chart_type, sample.blocks)
    out = apply_image_noise(sample, "salt_pepper_noise", {"amount": 0.02}, seed=3)
    corrupted = int(np.any(out.image != img, axis=2).sum())
    # Binomial(1e4, 0.02): mean 200, sigma 14; allow 3 sigma
    assert 200 - 3 * 14 <= corrupted <= 200 + 3 * 14
    # hits are pure black or pure white across channels
    changed = np.any(out.image != img, axis=2)
    hit_vals = out.image[changed]
    assert np.all((hit_vals == 0) | (hit_vals == 255))


def test_salt_pepper_determinism_and_range():
    sample = make_sample()
    a = apply_image_noise(sample, "salt_pepper_noise", {"amount": 0.05}, seed=9)
    b = apply_image_noise(sample, "salt_pepper_noise", {"amount": 0.05}, seed=9)
    assert np.array_equal(a.image, b.image)
    with pytest.raises(ValueError):
        apply_image_noise(sample, "salt_pepper_noise", {"amount": 0.2}, seed=0)
    with pytest.raises(ValueError):
        apply_image_noise(sample, "gaussian_noise", {"sigma": 30.0}, seed=0)


def test_gaussian_degenerate_sigma():
    sample = make_sample()
    out = apply_image_noise(sample, "gaussian_noise", {"sigma": 1e-9}, seed=1)
    assert np.max(np.abs(out.image.astype(int) - sample.image.astype(int))) <= 1


def test_noise_preserves_annotations(synth_chart):
    out = apply_image_noise(synth_chart, "gaussian_noise", {"sigma": 10.0}, seed=2)
    assert out.blocks == synth_chart.blocks
    assert out.image.shape == synth_chart.image.shape


# photometry --------------------------------------------------------------------

def test_brightness_exact_scaling():
    sample = make_sample()
    img = np.full_like(sample.image, 128)
    sample = type(sample)(sample.sample_id, img, sample.chart_type, sample.blocks)
    out = adjust_photometry(sample, "brightness", 0.5)
    assert np.all(out.image == 64)


def test_photometry_identity_at_one(synth_chart):
    for method in ("brightness", "color"):
        out = adjust_photometry(synth_chart, method, 1.0)
        assert np.array_equal(out.image, synth_chart.image)


def test_photometry_rejects_out_of_range(synth_chart):
    with pytest.raises(ValueError):
        adjust_photometry(synth_chart, "color", 0.0)
    with pytest.raises(ValueError):
        adjust_photometry(synth_chart, "brightness", 1.6)


def test_color_zero_saturation_would_be_grayscale():
    # factor at the low boundary moves channels toward luma
    sample = make_sample()
    img = sample.image.copy()
    img[:, :] = (200, 40, 90)
    sample = type(sample)(sample.sample_id, img, sample.chart_type, sample.blocks)
    out = adjust_photometry(sample, "color", 0.5)
    spread_before = img.max(axis=2).astype(int) - img.min(axis=2).astype(int)
    spread_after = out.image.max(axis=2).astype(int) - out.image.min(axis=2).astype(int)
    assert np.all(spread_after < spread_before)


# text ops ----------------------------------------------------------------------

def test_char_insert_contract():
    for seed in range(30):
        t = char_insert("ab", seed)
        assert len(t) == 3
        candidates = {f"{c}ab" for c in ALPHABET} | {f"a{c}b" for c in ALPHABET} \
            | {f"ab{c}" for c in ALPHABET}
        assert t in candidates
    assert char_insert("hello", 4) == char_insert("hello", 4)


def test_char_insert_subsequence_property():
    rng = np.random.default_rng(0)
    for _ in range(50):
        text = "".join(rng.choice(list("abcXYZ 123")) for _ in range(rng.integers(1, 20)))
        out = char_insert(text, int(rng.integers(1 << 30)))
        assert len(out) == len(text) + 1
        it = iter(out)
        assert all(ch in it for ch in text)  # subsequence


def test_char_substitute_hamming_one():
    rng = np.random.default_rng(1)
    for _ in range(50):
        text = "".join(rng.choice(list("abcdef 12"))
                       for _ in range(rng.integers(1, 15)))
        out = char_substitute(text, int(rng.integers(1 << 30)))
        assert len(out) == len(text)
        assert sum(a != b for a, b in zip(text, out)) == 1
    assert char_substitute("A", 0) != "A"
    assert char_substitute("xy", 3) == char_substitute("xy", 3)


def test_char_delete_prefix_rules():
    assert char_delete_prefix("tick", 0) == "tick"
    long = "French controls from general population"
    for seed in range(20):
        out = char_delete_prefix(long, seed)
        assert long.endswith(out)
        assert 1 <= len(long) - len(out) <= 5
    ten = "abcdefghij"
    for seed in range(20):
        assert 5 <= len(char_delete_prefix(ten, seed)) <= 9


def test_char_delete_prefix_known_cut():
    # a 3-character cut of the canonical example
    long = "French controls from general population"
    outs = {char_delete_prefix(long, seed) for seed in range(50)}
    assert "nch controls from general population" in outs


# recipes -----------------------------------------------------------------------

def test_recipe_validation_and_json_round_trip():
    r = AugmentationRecipe("rotation", {"theta": 12.0}, seed=4)
    again = AugmentationRecipe.from_json(r.to_json())
    assert again == r
    assert '"recipe"' in r.to_json()
    with pytest.raises(ValueError):
        AugmentationRecipe("warp", {}, 0)
    with pytest.raises(ValueError):
        AugmentationRecipe("brightness", {"factor": 2.0}, 0)


# corpus-level ------------------------------------------------------------------

def test_noisy_corpus_same_size_ids_histogram(synth_corpus_20):
    noisy = make_noisy_corpus(synth_corpus_20, seed=3)
    assert len(noisy) == len(synth_corpus_20)
    assert noisy.sample_ids() == synth_corpus_20.sample_ids()
    assert noisy.name.endswith("-N")
    assert all(s.provenance.endswith("-N") for s in noisy.samples)
    assert class_distribution(noisy) == class_distribution(synth_corpus_20)


def test_noisy_corpus_deterministic(synth_corpus_20):
    a = make_noisy_corpus(synth_corpus_20, seed=3)
    b = make_noisy_corpus(synth_corpus_20, seed=3)
    for x, y in zip(a.samples, b.samples):
        assert np.array_equal(x.image, y.image)
        assert x.blocks == y.blocks


def test_noisy_method_frequencies_uniform():
    """Chi-square goodness of fit for the method draw at alpha=0.01."""
    from chartrole.augment import derive_seed

    n = 10_000
    counts = {m: 0 for m in NOISY_POOL}
    for i in range(n):
        rng = np.random.default_rng(derive_seed(123, f"sample-{i}"))
        counts[NOISY_POOL[int(rng.integers(0, len(NOISY_POOL)))]] += 1
    expected = n / len(NOISY_POOL)
    stat = sum((c - expected) ** 2 / expected for c in counts.values())
    from scipy.stats import chi2

    assert stat < chi2.ppf(0.99, df=len(NOISY_POOL) - 1)


def test_augment_corpus_doubles_and_is_deterministic():
    corpus = generate_corpus(10, seed=2)
    out = augment_corpus(corpus, ("gaussian_noise",), seed=5)
    assert len(out) == 20
    assert out.sample_ids()[:10] == corpus.sample_ids()
    assert all(sid.endswith("-aug") for sid in out.sample_ids()[10:])
    # second half noisy: at least one pixel differs per augmented sample
    for orig, aug in zip(out.samples[:10], out.samples[10:]):
        assert not np.array_equal(orig.image, aug.image)
    again = augment_corpus(corpus, ("gaussian_noise",), seed=5)
    for a, b in zip(out.samples, again.samples):
        assert np.array_equal(a.image, b.image) and a.blocks == b.blocks


def test_augment_corpus_empty_and_bad_methods():
    empty = Corpus("e", ())
    assert len(augment_corpus(empty, ("gaussian_noise",), 0)) == 0
    with pytest.raises(ValueError):
        augment_corpus(generate_corpus(1, seed=0), ("sharpen",), 0)


def test_augment_default_method_set():
    from chartrole.augment import DEFAULT_TRAIN_METHODS

    assert set(DEFAULT_TRAIN_METHODS) == {
        "salt_pepper_noise", "gaussian_noise", "char_delete_prefix", "char_insert"}


def test_label_preservation_across_all_methods(synth_chart):
    from chartrole.augment import apply_recipe, sample_recipe

    for method in NOISY_POOL:
        out, _ = apply_recipe(synth_chart, sample_recipe(method, seed=11))
        assert [(b.block_id, b.role) for b in out.blocks] == \
               [(b.block_id, b.role) for b in synth_chart.blocks]
