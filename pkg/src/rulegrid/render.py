"""Deterministic standalone SVG for explanation views.

One matrix row per rule, one column per feature; interval predicates are
drawn as class-colored bars positioned inside the cell on the feature's
full-dataset range. Extra columns carry coverage (grayscale), certainty
(stacked class colors), the cumulative vote (used-rules views) and the
class swap (smallest-change views). Output bytes depend only on the inputs:
fixed element order, fixed decimal formatting, no timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .dataset import Dataset
from .errors import RenderError
from .explain import LE_SC, LE_UR, ExplanationView
from .forest import Forest
from .rules import RuleSet, extract_rules

# matplotlib's categorical tab10
DEFAULT_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]
# Okabe-Ito, safe for common color-vision deficiencies
COLORBLIND_PALETTE = [
    "#0072b2", "#e69f00", "#009e73", "#cc79a7", "#56b4e9",
    "#d55e00", "#f0e442", "#000000",
]


@dataclass
class RenderStyle:
    cell_width: float = 60.0
    cell_height: float = 16.0
    row_gap: float = 2.0
    col_gap: float = 2.0
    extra_gap: float = 12.0
    margin: float = 10.0
    header_height: float = 14.0
    label_area: float = 130.0
    font_size: float = 9.0
    palette: str = "default"  # "default" | "colorblind"
    desaturated_background: bool = True
    show_instance_lines: bool = True
    positive_change_color: str = "#2ca02c"
    negative_change_color: str = "#9467bd"

    def colors(self) -> list[str]:
        if self.palette == "colorblind":
            return COLORBLIND_PALETTE
        return DEFAULT_PALETTE

    def class_color(self, j: int) -> str:
        colors = self.colors()
        if j >= len(colors):
            raise RenderError(f"palette has {len(colors)} colors, class {j} requested")
        return colors[j]

    def validate(self, n_classes: int) -> None:
        dims = (self.cell_width, self.cell_height, self.header_height,
                self.font_size, self.label_area)
        if any(d <= 0 for d in dims):
            raise RenderError("style dimensions must be positive")
        if n_classes > len(self.colors()):
            raise RenderError(
                f"{n_classes} classes exceed the {len(self.colors())}-color palette"
            )


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _hex_to_rgb(color: str) -> tuple[int, int, int]:
    c = color.lstrip("#")
    return int(c[0:2], 16), int(c[2:4], 16), int(c[4:6], 16)


def _desaturate(color: str, strength: float = 0.78) -> str:
    """Blend toward white; strength is how far to go."""
    r, g, b = _hex_to_rgb(color)
    mix = lambda v: round(v + (255 - v) * strength)
    return f"#{mix(r):02x}{mix(g):02x}{mix(b):02x}"


def _gray(level: float) -> str:
    """0 -> white, 1 -> black."""
    v = round(255 * (1.0 - min(max(level, 0.0), 1.0)))
    return f"#{v:02x}{v:02x}{v:02x}"


class _Layout:
    """Pixel positions shared by the renderer and the hit-region sidecar."""

    def __init__(self, view: ExplanationView, style: RenderStyle):
        s = style
        self.n_rows = len(view.rule_rows)
        self.n_cols = len(view.feature_cols)
        self.cov_x = s.margin
        self.matrix_x = self.cov_x + s.cell_width + s.extra_gap
        self.cert_x = (
            self.matrix_x + self.n_cols * (s.cell_width + s.col_gap) - s.col_gap + s.extra_gap
        )
        self.vote_x = self.cert_x + s.cell_width + s.extra_gap
        extras = 1 if view.kind in (LE_UR, LE_SC) else 0
        right = self.cert_x + s.cell_width + extras * (s.extra_gap + s.cell_width)
        self.width = right + s.margin
        self.rows_y = s.margin + s.header_height + s.extra_gap
        self.rows_bottom = self.rows_y + self.n_rows * (s.cell_height + s.row_gap) - s.row_gap
        self.height = self.rows_bottom + s.extra_gap + s.label_area + s.margin
        self.style = s

    def col_x(self, c: int) -> float:
        return self.matrix_x + c * (self.style.cell_width + self.style.col_gap)

    def row_y(self, r: int) -> float:
        return self.rows_y + r * (self.style.cell_height + self.style.row_gap)


def _fraction(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0:
        return 0.0
    return (value - lo) / span


def _rect(x, y, w, h, fill, extra: str = "") -> str:
    return (
        f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'fill="{fill}"{extra}/>'
    )


def _stacked_bar(parts, x, y, w, h, colors) -> list[str]:
    out = [_rect(x, y, w, h, "#ffffff", ' stroke="#cccccc" stroke-width="0.5"')]
    offset = 0.0
    for value, color in zip(parts, colors):
        width = value * w
        if width > 0:
            out.append(_rect(x + offset, y, width, h, color))
        offset += width
    return out


def render(
    view: ExplanationView,
    dataset: Dataset,
    forest: Forest,
    style: RenderStyle | None = None,
    *,
    ruleset: RuleSet | None = None,
) -> str:
    """Render a view to SVG text. Byte-identical for identical inputs."""
    s = style or RenderStyle()
    s.validate(dataset.n_classes)
    if ruleset is None:
        ruleset = extract_rules(forest, dataset)
    _check_consistency(view, dataset, ruleset)

    lay = _Layout(view, s)
    fmin, fmax = dataset.feature_min, dataset.feature_max
    parts: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(lay.width)}" '
        f'height="{_fmt(lay.height)}" viewBox="0 0 {_fmt(lay.width)} {_fmt(lay.height)}">',
        _rect(0, 0, lay.width, lay.height, "#ffffff"),
    ]

    # importance header above the matrix columns: grayscale, fill width and
    # darkness both proportional to the importance
    header_y = s.margin
    for c, f in enumerate(view.feature_cols):
        imp = float(view.header[f])
        x = lay.col_x(c)
        parts.append(_rect(x, header_y, s.cell_width, s.header_height, "#ffffff",
                           ' stroke="#cccccc" stroke-width="0.5"'))
        if imp > 0:
            parts.append(_rect(x, header_y, imp * s.cell_width, s.header_height, _gray(imp)))

    # coverage column
    for r, extras in enumerate(view.row_extras):
        cov = float(extras["coverage"])
        y = lay.row_y(r)
        parts.append(_rect(lay.cov_x, y, s.cell_width, s.cell_height, "#ffffff",
                           ' stroke="#cccccc" stroke-width="0.5"'))
        if cov > 0:
            parts.append(_rect(lay.cov_x, y, cov * s.cell_width, s.cell_height, _gray(cov)))

    # matrix cells
    changes = view.change_vectors if view.kind == LE_SC else None
    for r, rid in enumerate(view.rule_rows):
        rule = ruleset.rules[rid]
        y = lay.row_y(r)
        for c, f in enumerate(view.feature_cols):
            x = lay.col_x(c)
            if view.kind == LE_SC:
                parts.extend(
                    _change_cell(changes[r], rule, f, x, y, lay, fmin, fmax, view.instance)
                )
            else:
                parts.extend(_predicate_cell(rule, f, x, y, lay, fmin, fmax))

    # certainty column: stacked class colors
    for r, extras in enumerate(view.row_extras):
        parts.extend(
            _stacked_bar(
                extras["certainty"], lay.cert_x, lay.row_y(r), s.cell_width, s.cell_height,
                [s.class_color(j) for j in range(dataset.n_classes)],
            )
        )

    if view.kind == LE_UR:
        for r, extras in enumerate(view.row_extras):
            parts.extend(
                _stacked_bar(
                    extras["cumulative_vote"], lay.vote_x, lay.row_y(r),
                    s.cell_width, s.cell_height,
                    [s.class_color(j) for j in range(dataset.n_classes)],
                )
            )
        # the committee's decision is fixed from this row on
        if view.decision_fixed_row is not None:
            y = lay.row_y(view.decision_fixed_row - 1) - s.row_gap / 2
            parts.append(
                f'<line x1="{_fmt(lay.vote_x)}" y1="{_fmt(y)}" '
                f'x2="{_fmt(lay.vote_x + s.cell_width)}" y2="{_fmt(y)}" '
                f'stroke="#000000" stroke-width="1.5"/>'
            )

    if view.kind == LE_SC:
        for r, extras in enumerate(view.row_extras):
            y = lay.row_y(r)
            half = s.cell_width / 2
            parts.append(_rect(lay.vote_x, y, half, s.cell_height,
                               s.class_color(int(extras["original_class"]))))
            parts.append(_rect(lay.vote_x + half, y, half, s.cell_height,
                               s.class_color(int(extras["class_index"]))))

    # dashed per-column markers at the instance's feature values
    if view.instance is not None and s.show_instance_lines:
        for c, f in enumerate(view.feature_cols):
            frac = _fraction(view.instance[f], fmin[f], fmax[f])
            x = lay.col_x(c) + frac * s.cell_width
            parts.append(
                f'<line x1="{_fmt(x)}" y1="{_fmt(lay.rows_y)}" x2="{_fmt(x)}" '
                f'y2="{_fmt(lay.rows_bottom)}" stroke="#333333" stroke-width="0.8" '
                f'stroke-dasharray="3,2"/>'
            )

    # feature labels (name + importance) below the matrix, plus extra-column labels
    label_y = lay.rows_bottom + s.extra_gap + s.font_size
    for c, f in enumerate(view.feature_cols):
        text = f"{dataset.feature_names[f]} ({float(view.header[f]):.2f})"
        x = lay.col_x(c) + s.cell_width / 2
        parts.append(_label(text, x, label_y, s))
    parts.append(_label("coverage", lay.cov_x + s.cell_width / 2, label_y, s))
    parts.append(_label("certainty", lay.cert_x + s.cell_width / 2, label_y, s))
    if view.kind == LE_UR:
        parts.append(_label("cumulative vote", lay.vote_x + s.cell_width / 2, label_y, s))
    elif view.kind == LE_SC:
        parts.append(_label("class swap", lay.vote_x + s.cell_width / 2, label_y, s))

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _label(text: str, x: float, y: float, s: RenderStyle) -> str:
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
        f'font-size="{_fmt(s.font_size)}" transform="rotate(90 {_fmt(x)} {_fmt(y)})">'
        f"{escape(text)}</text>"
    )


def _predicate_cell(rule, f, x, y, lay: _Layout, fmin, fmax) -> list[str]:
    s = lay.style
    p = rule.predicates[f]
    if p is None:
        return [_rect(x, y, s.cell_width, s.cell_height, "#ffffff",
                      ' stroke="#eeeeee" stroke-width="0.5"')]
    color = s.class_color(rule.class_index)
    bg = _desaturate(color) if s.desaturated_background else "#ffffff"
    lo = _fraction(p.alpha, fmin[f], fmax[f])
    hi = _fraction(p.beta, fmin[f], fmax[f])
    out = [_rect(x, y, s.cell_width, s.cell_height, bg)]
    width = (hi - lo) * s.cell_width
    if width > 0:
        out.append(_rect(x + lo * s.cell_width, y, width, s.cell_height, color))
    return out


def _change_cell(change, rule, f, x, y, lay: _Layout, fmin, fmax, instance) -> list[str]:
    s = lay.style
    delta = change.deltas[f]
    if delta == 0.0:
        return [_rect(x, y, s.cell_width, s.cell_height, "#ffffff",
                      ' stroke="#eeeeee" stroke-width="0.5"')]
    p = rule.predicates[f]
    color = s.positive_change_color if delta > 0 else s.negative_change_color
    bg = _desaturate(color) if s.desaturated_background else "#ffffff"
    inst_frac = _fraction(instance[f], fmin[f], fmax[f])
    bound = p.alpha if delta > 0 else p.beta
    bound_frac = _fraction(bound, fmin[f], fmax[f])
    lo, hi = min(inst_frac, bound_frac), max(inst_frac, bound_frac)
    out = [_rect(x, y, s.cell_width, s.cell_height, bg)]
    width = (hi - lo) * s.cell_width
    if width > 0:
        out.append(_rect(x + lo * s.cell_width, y, width, s.cell_height, color))
    return out


def _check_consistency(view: ExplanationView, dataset: Dataset, ruleset: RuleSet) -> None:
    m = dataset.n_features
    if len(view.header) != m:
        raise RenderError(f"view header has {len(view.header)} importances, dataset has {m} features")
    if any(not 0 <= f < m for f in view.feature_cols):
        raise RenderError("view feature column out of range for dataset")
    if any(not 0 <= rid < len(ruleset.rules) for rid in view.rule_rows):
        raise RenderError("view rule id out of range for forest")
    if view.instance is not None and len(view.instance) != m:
        raise RenderError("view instance arity does not match dataset")
    if view.kind == LE_SC and (
        view.change_vectors is None or len(view.change_vectors) != len(view.rule_rows)
    ):
        raise RenderError("smallest-change view lacks aligned change vectors")


def hit_regions(
    view: ExplanationView,
    dataset: Dataset,
    style: RenderStyle | None = None,
    *,
    ruleset: RuleSet | None = None,
) -> list[dict]:
    """Sidecar geometry: one entry per matrix cell for UI tooltips.

    Each entry names the cell's rule and feature and, when a rule set is
    available, the predicate interval drawn there (null for absent ones).
    """
    s = style or RenderStyle()
    lay = _Layout(view, s)
    out = []
    for r, rid in enumerate(view.rule_rows):
        for c, f in enumerate(view.feature_cols):
            entry = {
                "rule_id": rid,
                "feature": int(f),
                "x": round(lay.col_x(c), 6),
                "y": round(lay.row_y(r), 6),
                "width": s.cell_width,
                "height": s.cell_height,
            }
            if ruleset is not None:
                p = ruleset.rules[rid].predicates[f]
                entry["alpha"] = None if p is None else p.alpha
                entry["beta"] = None if p is None else p.beta
            out.append(entry)
    return out
