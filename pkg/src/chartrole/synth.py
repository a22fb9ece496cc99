"""Deterministic generator of labeled synthetic charts.

Every text element is drawn through the bundled bitmap font, so the emitted
bounding boxes are exact: ink never leaves its block's bbox and there are no
unlabeled text pixels. Rasters and annotations are pure functions of the
spec and seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from chartrole import fonts
from chartrole.corpus import ChartSample, Corpus, TextBlock
from chartrole.roles import ROLE_ORDER, TextRole

ALL_ROLES = frozenset(ROLE_ORDER)

PALETTE = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (148, 103, 189),
           (255, 127, 14), (140, 86, 75)]

_TITLE_WORDS = ["Revenue", "Growth", "Energy", "Sample", "Index", "Signal",
                "Error", "Output", "Score", "Usage", "Demand", "Yield"]
_UNIT_WORDS = ["units", "days", "kWh", "points", "percent", "runs", "items", "cycles"]
_CATEGORY_SETS = [
    ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8"],
    ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug"],
    ["A", "B", "C", "D", "E", "F", "G", "H"],
    ["S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8"],
]
_SERIES_WORDS = ["alpha", "beta", "gamma", "delta", "omega", "sigma"]


class ChartSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ChartSpec:
    chart_type: str = "bar"  # bar | line | scatter
    n_series: int = 2
    x_ticks: int = 5
    y_ticks: int = 4
    roles: frozenset = field(default_factory=lambda: ALL_ROLES)
    canvas: tuple[int, int] = (320, 240)
    font_scale: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.chart_type not in ("bar", "line", "scatter"):
            raise ChartSpecError(f"unsupported chart type {self.chart_type!r}")
        if self.x_ticks < 2 or self.y_ticks < 2:
            raise ChartSpecError("tick counts must be at least 2")
        if self.n_series < 1:
            raise ChartSpecError("need at least one series")
        bad = set(self.roles) - ALL_ROLES
        if bad:
            raise ChartSpecError(f"unknown roles requested: {bad}")


class _Builder:
    def __init__(self, spec: ChartSpec, sample_id: str):
        self.spec = spec
        self.id = sample_id
        w, h = spec.canvas
        self.canvas = np.full((h, w, 3), 255, dtype=np.uint8)
        self.blocks: list[TextBlock] = []
        self.rng = np.random.default_rng(spec.seed)
        self.ink = np.zeros((h, w), dtype=bool)
        self._pending: list[tuple[int, int, str, TextRole, tuple]] = []

    def text(self, x: int, y: int, s: str, role: TextRole,
             color=(0, 0, 0)) -> None:
        """Queue a text element; all text is painted after the chart marks so
        labels are never overdrawn."""
        if role not in self.spec.roles:
            return
        scale = self.spec.font_scale
        w, h = fonts.text_size(s, scale)
        cw, chh = self.spec.canvas
        x = int(min(max(x, 0), cw - w))
        y = int(min(max(y, 0), chh - h))
        self._pending.append((x, y, s, role, color))

    def _flush_text(self) -> None:
        scale = self.spec.font_scale
        for x, y, s, role, color in self._pending:
            bbox = fonts.draw_text(self.canvas, x, y, s, scale, color, out_ink=self.ink)
            self.blocks.append(TextBlock(len(self.blocks), s, bbox, role))
        self._pending.clear()

    def build(self) -> ChartSample:
        spec, rng = self.spec, self.rng
        scale = spec.font_scale
        w, h = spec.canvas
        gh = fonts.GLYPH_H * scale  # text line height

        categories = _CATEGORY_SETS[int(rng.integers(len(_CATEGORY_SETS)))][:spec.x_ticks]
        if len(categories) < spec.x_ticks:
            categories += [f"c{i}" for i in range(len(categories), spec.x_ticks)]
        series_names = [f"{_SERIES_WORDS[k % len(_SERIES_WORDS)]}" for k in range(spec.n_series)]
        y_step = int(rng.choice([5, 10, 20, 25]))
        y_values = [i * y_step for i in range(spec.y_ticks)]

        # vertical layout, bottom-up
        footer_y = h - gh - 2
        xtitle_y = footer_y - gh - 4
        want_group = TextRole.TICK_GROUPING in spec.roles and spec.x_ticks >= 4
        group_y = xtitle_y - gh - 3 if want_group else None
        xtick_y = (group_y if want_group else xtitle_y) - gh - 3
        axis_y = xtick_y - 3  # x axis line

        title_y = 3
        ytitle_y = title_y + gh + 4
        plot_top = ytitle_y + gh + 6

        ytick_w = max(fonts.text_size(str(v), scale)[0] for v in y_values)
        axis_x = 4 + ytick_w + 4
        legend_w = (max(fonts.text_size(s, scale)[0] for s in series_names + ["Legend"])
                    + 12 + 8) if (spec.roles & {TextRole.LEGEND_LABEL, TextRole.LEGEND_TITLE}) else 0
        plot_right = w - legend_w - 8

        if plot_right - axis_x < 12 * spec.x_ticks or axis_y - plot_top < 10 * spec.y_ticks:
            raise ChartSpecError(
                f"canvas {spec.canvas} too small for {spec.x_ticks}x{spec.y_ticks} "
                f"ticks with the requested elements")

        title = " ".join(rng.choice(_TITLE_WORDS, size=2, replace=False))
        self.text((axis_x + plot_right) // 2 - fonts.text_size(title, scale)[0] // 2,
                  title_y, title, TextRole.CHART_TITLE)
        yt = str(rng.choice(_TITLE_WORDS))
        self.text(4, ytitle_y, yt, TextRole.AXIS_TITLE)
        xt = f"{rng.choice(_TITLE_WORDS)} ({rng.choice(_UNIT_WORDS)})"
        self.text((axis_x + plot_right) // 2 - fonts.text_size(xt, scale)[0] // 2,
                  xtitle_y, xt, TextRole.AXIS_TITLE)

        # axes
        self.canvas[axis_y, axis_x:plot_right] = 0
        self.canvas[plot_top:axis_y + 1, axis_x] = 0

        # y ticks, bottom to top
        for i, v in enumerate(y_values):
            ty = axis_y - round(i * (axis_y - plot_top) / (spec.y_ticks - 1)) - gh // 2
            label = str(v)
            self.text(axis_x - 3 - fonts.text_size(label, scale)[0],
                      int(np.clip(ty, plot_top - gh, axis_y)), label, TextRole.TICK_LABEL)

        # x ticks
        slot = (plot_right - axis_x) / spec.x_ticks
        xcenters = [axis_x + slot * (i + 0.5) for i in range(spec.x_ticks)]
        for cx, label in zip(xcenters, categories):
            self.text(int(cx - fonts.text_size(label, scale)[0] / 2), xtick_y,
                      label, TextRole.TICK_LABEL)

        if want_group:
            half = spec.x_ticks // 2
            for gi, name in enumerate(["Group A", "Group B"]):
                lo = xcenters[0] if gi == 0 else xcenters[half]
                hi = xcenters[half - 1] if gi == 0 else xcenters[-1]
                gx = (lo + hi) / 2 - fonts.text_size(name, scale)[0] / 2
                self.text(int(gx), group_y, name, TextRole.TICK_GROUPING)

        if spec.roles & {TextRole.LEGEND_LABEL, TextRole.LEGEND_TITLE}:
            lx = plot_right + 8
            ly = plot_top
            self.text(lx, ly, "Legend", TextRole.LEGEND_TITLE)
            ly += gh + 3
            for k, name in enumerate(series_names):
                color = PALETTE[k % len(PALETTE)]
                self.canvas[ly + 1:ly + gh - 1, lx:lx + 6] = color
                self.text(lx + 9, ly, name, TextRole.LEGEND_LABEL, color=(0, 0, 0))
                ly += gh + 3

        vmax = (spec.y_ticks - 1) * y_step
        values = rng.integers(max(vmax // 6, 1), vmax + 1,
                              size=(spec.n_series, spec.x_ticks))
        if spec.chart_type == "bar":
            self._draw_bars(values, xcenters, axis_y, plot_top, vmax, slot)
        elif spec.chart_type == "line":
            self._draw_lines(values, xcenters, axis_y, plot_top, vmax)
        else:
            self._draw_scatter(xcenters, axis_y, plot_top)

        if TextRole.OTHER in spec.roles:
            self.text(4, footer_y, "Source: synthetic corpus", TextRole.OTHER)

        self._flush_text()
        return ChartSample(self.id, self.canvas, spec.chart_type,
                           tuple(self.blocks), provenance="synth")

    # mark drawing -----------------------------------------------------------

    def _value_pos(self, v: int, vmax: int, axis_y: int, plot_top: int) -> int:
        frac = min(v, vmax) / max(vmax, 1)
        return int(round(axis_y - frac * (axis_y - plot_top)))

    def _draw_bars(self, values, xcenters, axis_y, plot_top, vmax, slot):
        spec = self.spec
        scale = spec.font_scale
        n = spec.n_series
        bw = max(2, int(slot / (n + 1)))
        for i, cx in enumerate(xcenters):
            group_w = bw * n
            x0 = int(cx - group_w / 2)
            for k in range(n):
                v = int(values[k, i])
                top = self._value_pos(v, vmax, axis_y, plot_top)
                color = PALETTE[k % len(PALETTE)]
                self.canvas[top:axis_y, x0 + k * bw:x0 + (k + 1) * bw] = color
                if k == 0 and TextRole.VALUE_LABEL in spec.roles:
                    self.text(x0, max(top - fonts.GLYPH_H * scale - 1, 0),
                              str(v), TextRole.VALUE_LABEL)

    def _draw_lines(self, values, xcenters, axis_y, plot_top, vmax):
        spec = self.spec
        for k in range(spec.n_series):
            color = PALETTE[k % len(PALETTE)]
            pts = [(int(cx), self._value_pos(int(values[k, i]), vmax, axis_y, plot_top))
                   for i, cx in enumerate(xcenters)]
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                self._line(x0, y0, x1, y1, color)
            for x0, y0 in pts:
                self.canvas[max(y0 - 1, 0):y0 + 2, max(x0 - 1, 0):x0 + 2] = color
            if TextRole.MARK_LABEL in spec.roles:
                x_last, y_last = pts[-1]
                self.text(x_last + 4, max(y_last - fonts.GLYPH_H * spec.font_scale // 2, 0),
                          _SERIES_WORDS[k % len(_SERIES_WORDS)], TextRole.MARK_LABEL)
        if TextRole.VALUE_LABEL in spec.roles:
            i = int(np.argmax(values[0]))
            peak = self._value_pos(int(values[0, i]), vmax, axis_y, plot_top)
            self.text(int(xcenters[i]) + 3, max(peak - fonts.GLYPH_H * spec.font_scale - 2, 0),
                      str(int(values[0, i])), TextRole.VALUE_LABEL)

    def _draw_scatter(self, xcenters, axis_y, plot_top):
        spec, rng = self.spec, self.rng
        for k in range(spec.n_series):
            color = PALETTE[k % len(PALETTE)]
            ys = rng.integers(plot_top + 4, axis_y - 4, size=len(xcenters))
            xs = [int(cx + rng.integers(-4, 5)) for cx in xcenters]
            for x0, y0 in zip(xs, ys):
                self.canvas[max(y0 - 1, 0):y0 + 2, max(x0 - 1, 0):x0 + 2] = color
            if TextRole.MARK_LABEL in spec.roles:
                self.text(xs[-1] + 4, int(ys[-1]),
                          _SERIES_WORDS[k % len(_SERIES_WORDS)], TextRole.MARK_LABEL)
        shown = int(rng.integers(10, 99))  # drawn regardless, for rng parity
        if TextRole.VALUE_LABEL in spec.roles:
            self.text(int(xcenters[0]) + 3, plot_top + 2, str(shown),
                      TextRole.VALUE_LABEL)

    def _line(self, x0, y0, x1, y1, color):
        n = max(abs(x1 - x0), abs(y1 - y0), 1)
        xs = np.rint(np.linspace(x0, x1, n + 1)).astype(int)
        ys = np.rint(np.linspace(y0, y1, n + 1)).astype(int)
        h, w = self.canvas.shape[:2]
        keep = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
        self.canvas[ys[keep], xs[keep]] = color


def generate_chart(spec: ChartSpec, sample_id: str | None = None) -> ChartSample:
    """Render one chart with exact per-block role annotations."""
    return _Builder(spec, sample_id or f"synth-{spec.seed:04d}").build()


def render_with_ink(spec: ChartSpec) -> tuple[ChartSample, np.ndarray]:
    """generate_chart plus the boolean mask of every text pixel painted,
    for ground-truth tightness checks."""
    builder = _Builder(spec, f"synth-{spec.seed:04d}")
    sample = builder.build()
    return sample, builder.ink


def default_spec_mix() -> list[tuple[ChartSpec, float]]:
    """Chart-type mix whose union of drawn elements covers all nine roles."""
    return [
        (ChartSpec(chart_type="bar", n_series=2, x_ticks=5, y_ticks=4), 0.4),
        (ChartSpec(chart_type="line", n_series=2, x_ticks=6, y_ticks=4), 0.35),
        (ChartSpec(chart_type="scatter", n_series=2, x_ticks=5, y_ticks=4), 0.25),
    ]


def generate_corpus(n: int, spec_mix=None, seed: int = 0, *,
                    name: str = "synth") -> Corpus:
    """Generate n charts with ids synth-0000..., deterministic under seed."""
    if n <= 0:
        raise ValueError("n must be positive")
    mix = spec_mix if spec_mix is not None else default_spec_mix()
    specs = [m[0] for m in mix]
    weights = np.asarray([m[1] for m in mix], dtype=float)
    weights = weights / weights.sum()
    rng = np.random.default_rng(seed)
    choices = rng.choice(len(specs), size=n, p=weights)
    samples = []
    for i in range(n):
        spec = replace(specs[choices[i]], seed=int(rng.integers(0, 2**31 - 1)))
        samples.append(generate_chart(spec, sample_id=f"{name}-{i:04d}"))
    return Corpus(name, tuple(samples))


def strip_roles(corpus: Corpus) -> Corpus:
    """Copy of the corpus with every role label removed (annotation-workflow input)."""
    samples = []
    for s in corpus.samples:
        blocks = tuple(replace(b, role=None) for b in s.blocks)
        samples.append(s.with_blocks(blocks))
    return Corpus(corpus.name, tuple(samples), dict(corpus.splits))
