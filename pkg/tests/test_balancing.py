import numpy as np
import pytest

from chartrole.balancing import (ClassWeights, class_weights, cutout_corpus,
                                 cutout_sample, weighted_cross_entropy)
from chartrole.corpus import Corpus, TextBlock, class_distribution
from chartrole.geometry import BoundingBox
from chartrole.roles import ROLE_ORDER, TextRole
from chartrole.synth import generate_corpus

from conftest import IMBALANCED_HISTOGRAM, make_sample


# class weights -----------------------------------------------------------------

def test_uniform_histogram_gives_unit_weights():
    hist = {r: 10 for r in ROLE_ORDER}
    w = class_weights(hist)
    assert np.allclose(w.w, 1.0)


def test_two_class_weights_formula():
    hist = {TextRole.TICK_LABEL: 90, TextRole.AXIS_TITLE: 10}
    w = class_weights(hist)
    assert w.of(TextRole.TICK_LABEL) == pytest.approx(100 / (2 * 90))
    assert w.of(TextRole.AXIS_TITLE) == pytest.approx(5.0)
    # zero-count classes take the max computed weight
    assert w.of(TextRole.OTHER) == pytest.approx(5.0)


def test_imbalanced_weights_monotonic():
    w = class_weights(IMBALANCED_HISTOGRAM)
    assert w.of(TextRole.TICK_LABEL) < w.of(TextRole.LEGEND_TITLE)
    counts = sorted(IMBALANCED_HISTOGRAM.items(), key=lambda kv: kv[1])
    weights = [w.of(r) for r, _ in counts]
    assert all(a >= b for a, b in zip(weights, weights[1:]))


def test_empty_histogram_rejected():
    with pytest.raises(ValueError):
        class_weights({})
    with pytest.raises(ValueError):
        class_weights({r: 0 for r in ROLE_ORDER})


# weighted cross entropy -----------------------------------------------------------

def test_unit_weights_equal_unweighted():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(40, 9))
    labels = rng.integers(0, 9, size=40)
    ones = ClassWeights(np.ones(9))
    assert abs(weighted_cross_entropy(logits, labels, ones)
               - weighted_cross_entropy(logits, labels, None)) < 1e-12


def test_saturated_logits_near_zero_loss():
    logits = np.zeros((1, 9))
    logits[0, 3] = 1e6
    assert weighted_cross_entropy(logits, [TextRole.AXIS_TITLE]) < 1e-9


def test_two_block_hand_computation():
    # independent scalar oracle computed with plain floats
    logits = np.array([[2.0, 0.5, 0.0, 0, 0, 0, 0, 0, 0],
                       [0.0, 1.0, -1.0, 0, 0, 0, 0, 0, 0]])
    labels = [0, 2]
    w = np.array([2.0, 1.0, 0.5, 1, 1, 1, 1, 1, 1])

    def nll(row, k):
        import math

        z = [math.exp(v) for v in row]
        return -math.log(z[k] / sum(z))

    expected = (2.0 * nll(logits[0], 0) + 0.5 * nll(logits[1], 2)) / 2
    got = weighted_cross_entropy(logits, labels, ClassWeights(w))
    assert got == pytest.approx(expected, rel=1e-12)


def test_nonfinite_logits_rejected():
    with pytest.raises(ValueError):
        weighted_cross_entropy(np.array([[np.inf] + [0] * 8]), [0])


# cutout ---------------------------------------------------------------------------

def _tick_heavy_sample():
    blocks = [TextBlock(i, "9", BoundingBox(2 + 5 * i, 2, 4, 4), TextRole.TICK_LABEL)
              for i in range(10)]
    blocks.append(TextBlock(10, "Title", BoundingBox(2, 30, 30, 8), TextRole.CHART_TITLE))
    return make_sample(blocks=tuple(blocks), size=(64, 48))


def test_cutout_masks_exactly_planned_regions():
    sample = _tick_heavy_sample()
    hist = class_distribution(Corpus("c", (sample,)))
    out, plan = cutout_sample(sample, hist, seed=5)
    assert plan.n_masks == len(plan.masked_block_ids)
    assert out.blocks == sample.blocks  # annotations untouched
    covered = np.zeros(sample.image.shape[:2], dtype=bool)
    for bid in plan.masked_block_ids:
        bb = sample.block(bid).bbox
        assert sample.block(bid).role == plan.target_class
        x0, y0, x1, y1 = int(bb.x), int(bb.y), int(np.ceil(bb.x2)), int(np.ceil(bb.y2))
        region = out.image[y0:y1, x0:x1]
        assert np.all(region == np.array(plan.mask_color, dtype=np.uint8))
        covered[y0:y1, x0:x1] = True
    assert np.array_equal(out.image[~covered], sample.image[~covered])


def test_cutout_single_class_is_deterministic_target():
    blocks = (TextBlock(0, "Days", BoundingBox(2, 2, 20, 6), TextRole.AXIS_TITLE),)
    sample = make_sample(blocks=blocks)
    hist = {TextRole.AXIS_TITLE: 1}
    for seed in range(10):
        _, plan = cutout_sample(sample, hist, seed)
        assert plan.target_class == TextRole.AXIS_TITLE
        assert plan.n_masks == 1


def test_cutout_requires_labeled_blocks():
    from chartrole.synth import strip_roles

    bare = strip_roles(generate_corpus(1, seed=0)).samples[0]
    with pytest.raises(ValueError):
        cutout_sample(bare, IMBALANCED_HISTOGRAM, 0)


def test_cutout_class_sampling_proportional():
    """Chi-square at alpha=0.01 against the proportional model on the
    imbalanced reference histogram."""
    from scipy.stats import chi2

    blocks = [TextBlock(i, "x", BoundingBox(1 + i, 1, 1, 1), role)
              for i, role in enumerate(ROLE_ORDER)]
    sample = make_sample(blocks=tuple(blocks), size=(32, 24))
    n = 10_000
    counts = {r: 0 for r in ROLE_ORDER}
    for seed in range(n):
        _, plan = cutout_sample(sample, IMBALANCED_HISTOGRAM, seed)
        counts[plan.target_class] += 1
    total = sum(IMBALANCED_HISTOGRAM.values())
    stat = 0.0
    for role in ROLE_ORDER:
        expected = n * IMBALANCED_HISTOGRAM[role] / total
        stat += (counts[role] - expected) ** 2 / expected
    assert stat < chi2.ppf(0.99, df=8)
    # majority class dominates at roughly its frequency share
    assert counts[TextRole.TICK_LABEL] / n == pytest.approx(95_430 / total, abs=0.02)


def test_cutout_n_masks_in_range():
    sample = _tick_heavy_sample()
    hist = class_distribution(Corpus("c", (sample,)))
    seen = set()
    for seed in range(60):
        _, plan = cutout_sample(sample, hist, seed)
        if plan.target_class == TextRole.TICK_LABEL:
            assert 1 <= plan.n_masks <= 10
            seen.add(plan.n_masks)
    assert len(seen) > 3  # the count really varies


def test_cutout_corpus_concatenates():
    corpus = generate_corpus(6, seed=1)
    out = cutout_corpus(corpus, seed=2)
    assert len(out) == 12
    assert all(s.sample_id.endswith("-cut") for s in out.samples[6:])
    assert class_distribution(out)[TextRole.TICK_LABEL] == \
        2 * class_distribution(corpus)[TextRole.TICK_LABEL]


def test_cutout_round_trips_through_export(tmp_path):
    from chartrole.formats import export_annotations, load_corpus

    corpus = generate_corpus(2, seed=3)
    masked = cutout_corpus(corpus, seed=4)
    export_annotations(masked, tmp_path)
    loaded, report = load_corpus(tmp_path, "native")
    assert not report.skipped
    assert len(loaded) == 4
