import numpy as np
import pytest

from chartrole.corpus import ChartSample, Corpus, TextBlock
from chartrole.geometry import BoundingBox
from chartrole.roles import TextRole
from chartrole.synth import ChartSpec, generate_chart, generate_corpus

# Reference class counts of a strongly imbalanced chart-corpus train split,
# used by the balancing statistical oracles.
IMBALANCED_HISTOGRAM = {
    TextRole.LEGEND_TITLE: 190,
    TextRole.CHART_TITLE: 493,
    TextRole.TICK_GROUPING: 792,
    TextRole.MARK_LABEL: 1_920,
    TextRole.VALUE_LABEL: 7_649,
    TextRole.AXIS_TITLE: 10_721,
    TextRole.LEGEND_LABEL: 12_286,
    TextRole.TICK_LABEL: 95_430,
    TextRole.OTHER: 6_305,
}


def make_sample(sample_id="s0", size=(64, 48), blocks=None, chart_type="bar"):
    w, h = size
    image = np.full((h, w, 3), 255, dtype=np.uint8)
    if blocks is None:
        blocks = (
            TextBlock(0, "Title", BoundingBox(10, 2, 30, 8), TextRole.CHART_TITLE),
            TextBlock(1, "x", BoundingBox(30, 40, 6, 6), TextRole.AXIS_TITLE),
        )
    return ChartSample(sample_id, image, chart_type, tuple(blocks))


@pytest.fixture
def small_corpus():
    return Corpus("small", tuple(make_sample(f"s{i}") for i in range(4)))


@pytest.fixture
def synth_chart():
    return generate_chart(ChartSpec(seed=7))


@pytest.fixture(scope="session")
def synth_corpus_20():
    return generate_corpus(20, seed=5)
