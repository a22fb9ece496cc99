"""Toolkit for classifying the semantic role of text elements in scientific charts."""

__version__ = "0.1.0"

from chartrole.roles import TextRole
from chartrole.geometry import BoundingBox
from chartrole.corpus import TextBlock, ChartSample, Corpus

__all__ = ["TextRole", "BoundingBox", "TextBlock", "ChartSample", "Corpus", "__version__"]
