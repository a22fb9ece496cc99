"""The nine text role classes.

ROLE_ORDER is the canonical ordering used everywhere a role index appears:
class histograms, weight vectors, classifier logits, and the 1-9 key
bindings of the annotation UI.
"""

from __future__ import annotations

import enum


class TextRole(enum.Enum):
    CHART_TITLE = "chart_title"
    LEGEND_TITLE = "legend_title"
    LEGEND_LABEL = "legend_label"
    AXIS_TITLE = "axis_title"
    TICK_LABEL = "tick_label"
    TICK_GROUPING = "tick_grouping"
    MARK_LABEL = "mark_label"
    VALUE_LABEL = "value_label"
    OTHER = "other"

    def __str__(self) -> str:
        return self.value


ROLE_ORDER: tuple[TextRole, ...] = tuple(TextRole)
ROLE_NAMES: tuple[str, ...] = tuple(r.value for r in ROLE_ORDER)
ROLE_INDEX: dict[TextRole, int] = {r: i for i, r in enumerate(ROLE_ORDER)}
NUM_ROLES = len(ROLE_ORDER)


def parse_role(name: str) -> TextRole:
    """Parse a role name, tolerating spaces, hyphens, and case variants."""
    key = name.strip().lower().replace(" ", "_").replace("-", "_")
    try:
        return TextRole(key)
    except ValueError:
        raise ValueError(f"unknown text role: {name!r}") from None
