import numpy as np
import pytest

from chartrole.corpus import Corpus, class_distribution
from chartrole.formats import export_annotations, load_corpus
from chartrole.roles import ROLE_ORDER, TextRole
from chartrole.synth import ChartSpec, ChartSpecError, generate_chart, generate_corpus


def test_histogram_by_construction():
    roles = frozenset({TextRole.CHART_TITLE, TextRole.AXIS_TITLE,
                       TextRole.TICK_LABEL, TextRole.LEGEND_LABEL})
    spec = ChartSpec(chart_type="bar", n_series=2, x_ticks=5, y_ticks=4,
                     roles=roles, seed=1)
    sample = generate_chart(spec)
    hist = class_distribution(Corpus("t", (sample,)))
    assert hist[TextRole.CHART_TITLE] == 1
    assert hist[TextRole.AXIS_TITLE] == 2
    assert hist[TextRole.TICK_LABEL] == 9
    assert hist[TextRole.LEGEND_LABEL] == 2
    assert sum(hist.values()) == 14


def test_same_spec_same_seed_identical():
    a = generate_chart(ChartSpec(seed=42))
    b = generate_chart(ChartSpec(seed=42))
    assert np.array_equal(a.image, b.image)
    assert a.blocks == b.blocks


def test_excluding_legend_removes_legend_blocks():
    roles = frozenset(ROLE_ORDER) - {TextRole.LEGEND_LABEL, TextRole.LEGEND_TITLE}
    sample = generate_chart(ChartSpec(roles=roles, seed=3))
    present = {b.role for b in sample.blocks}
    assert TextRole.LEGEND_LABEL not in present
    assert TextRole.LEGEND_TITLE not in present


def test_canvas_too_small_rejected():
    with pytest.raises(ChartSpecError):
        generate_chart(ChartSpec(canvas=(80, 60), x_ticks=8, y_ticks=8))


def test_invalid_spec_fields():
    with pytest.raises(ChartSpecError):
        ChartSpec(chart_type="pie")
    with pytest.raises(ChartSpecError):
        ChartSpec(x_ticks=1)


def test_generate_corpus_covers_all_roles():
    corpus = generate_corpus(200, seed=1)
    assert len(corpus) == 200
    assert corpus.sample_ids()[0] == "synth-0000"
    hist = class_distribution(corpus)
    assert all(hist[r] > 0 for r in ROLE_ORDER)


def test_generate_corpus_singleton_and_seed_variation():
    assert len(generate_corpus(1, seed=0)) == 1
    a = generate_corpus(3, seed=0)
    b = generate_corpus(3, seed=1)
    assert any(not np.array_equal(x.image, y.image)
               for x, y in zip(a.samples, b.samples))


def test_text_pixels_confined_to_bbox():
    """Every painted text pixel lies inside some block's bbox, and the raster
    carries the ink (text is drawn last, never overpainted)."""
    from chartrole.synth import render_with_ink

    for seed in (13, 14, 15):
        for chart_type in ("bar", "line", "scatter"):
            sample, ink = render_with_ink(ChartSpec(chart_type=chart_type, seed=seed))
            covered = np.zeros(ink.shape, dtype=bool)
            for b in sample.blocks:
                x0, y0 = int(b.bbox.x), int(b.bbox.y)
                x1, y1 = int(np.ceil(b.bbox.x2)), int(np.ceil(b.bbox.y2))
                covered[y0:y1, x0:x1] = True
            assert not np.any(ink & ~covered), "text ink escaped its bbox"
            assert np.all(sample.image[ink] == 0), "text ink overpainted"
            assert ink.any()


def test_generated_corpus_round_trips(tmp_path):
    corpus = generate_corpus(5, seed=21)
    export_annotations(corpus, tmp_path)
    loaded, report = load_corpus(tmp_path, "native")
    assert not report.skipped
    assert loaded.sample_ids() == corpus.sample_ids()
    for a, b in zip(corpus.samples, loaded.samples):
        assert np.array_equal(a.image, b.image)
        assert a.blocks == b.blocks
