import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from rulegrid import (
    RenderError,
    RenderStyle,
    RuleFilter,
    TrainParams,
    extract_rules,
    global_view,
    hit_regions,
    import_forest,
    local_smallest_changes,
    local_used_rules,
    render,
    train_forest,
)
from tests.conftest import X13

GOLDEN = Path(__file__).parent / "golden"
SVG_NS = "{http://www.w3.org/2000/svg}"


def _rects(svg_text):
    root = ET.fromstring(svg_text)
    return [
        {k: float(v) if k in ("x", "y", "width", "height") else v for k, v in el.attrib.items()}
        for el in root.iter(f"{SVG_NS}rect")
    ]


def _rects_inside(rects, region, fill_not=("#ffffff",)):
    out = []
    for r in rects:
        if (
            r["x"] >= region["x"] - 1e-6
            and r["x"] + r["width"] <= region["x"] + region["width"] + 1e-6
            and abs(r["y"] - region["y"]) < 1e-6
            and r["fill"] not in fill_not
        ):
            out.append(r)
    return out


def test_svg_is_well_formed_and_deterministic(hand_rules, hand_forest, iris):
    view = global_view(hand_rules)
    outputs = {render(view, iris, hand_forest, ruleset=hand_rules) for _ in range(3)}
    assert len(outputs) == 1
    root = ET.fromstring(outputs.pop())
    assert root.tag == f"{SVG_NS}svg"


def test_r3_cell_geometry(hand_rules, hand_forest, iris):
    """The sepal-length bar of the worked-example rule spans from
    (6.15-4.3)/3.6 of the cell to its right edge."""
    style = RenderStyle()
    view = global_view(hand_rules)
    svg = render(view, iris, hand_forest, style, ruleset=hand_rules)
    rects = _rects(svg)
    regions = hit_regions(view, iris, style)
    region = next(r for r in regions if r["rule_id"] == 2 and r["feature"] == 0)
    bars = _rects_inside(rects, region)
    # desaturated background plus the saturated interval bar
    assert len(bars) == 2
    bar = max(bars, key=lambda r: r["x"])  # saturated bar starts inside the cell
    frac_lo = (bar["x"] - region["x"]) / region["width"]
    frac_hi = (bar["x"] + bar["width"] - region["x"]) / region["width"]
    assert frac_lo == pytest.approx((6.15 - 4.3) / (7.9 - 4.3), abs=1e-6)
    assert frac_hi == pytest.approx(1.0, abs=1e-6)
    assert bar["fill"] == "#ff7f0e"  # versicolor is class 1: orange


def test_all_cells_inside_matrix(hand_rules, hand_forest, iris):
    style = RenderStyle()
    view = global_view(hand_rules)
    svg = render(view, iris, hand_forest, style, ruleset=hand_rules)
    rects = _rects(svg)
    for region in hit_regions(view, iris, style):
        for bar in _rects_inside(rects, region):
            assert bar["x"] >= region["x"] - 1e-6
            assert bar["x"] + bar["width"] <= region["x"] + region["width"] + 1e-6


def test_vacuous_rule_row_blank_and_coverage_full(iris):
    doc = {
        "version": 1,
        "feature_names": list(iris.feature_names),
        "class_names": list(iris.class_names),
        "trees": [
            {"nodes": [{"id": 0, "kind": "leaf", "counts": [5, 3, 0]}], "root": 0},
            {
                "nodes": [
                    {"id": 0, "kind": "internal", "feature": 1, "threshold": 3.0, "left": 1, "right": 2},
                    {"id": 1, "kind": "leaf", "counts": [4, 1, 0]},
                    {"id": 2, "kind": "leaf", "counts": [0, 2, 2]},
                ],
                "root": 0,
            },
        ],
        "train_params": {},
    }
    forest = import_forest(doc, iris)
    rs = extract_rules(forest, iris)
    style = RenderStyle()
    view = global_view(rs)
    svg = render(view, iris, forest, style, ruleset=rs)
    rects = _rects(svg)
    region = next(r for r in hit_regions(view, iris, style) if r["rule_id"] == 0)
    assert _rects_inside(rects, region) == []  # no predicate: blank cell
    # the vacuous rule's coverage bar fills its full cell and is black
    cov_bars = [
        r for r in rects
        if abs(r["y"] - region["y"]) < 1e-6 and r["fill"] == "#000000"
    ]
    assert len(cov_bars) == 1
    assert cov_bars[0]["width"] == pytest.approx(style.cell_width, abs=1e-6)


def test_certainty_stack_sums_to_cell_width(hand_rules, hand_forest, iris):
    style = RenderStyle()
    view = global_view(hand_rules)
    svg = render(view, iris, hand_forest, style, ruleset=hand_rules)
    class_colors = {"#1f77b4", "#ff7f0e", "#2ca02c"}
    matrix_right = max(r["x"] + r["width"] for r in hit_regions(view, iris, style))
    rows = {}
    for r in _rects(svg):
        if r["fill"] in class_colors and r["x"] > matrix_right:
            rows.setdefault(r["y"], []).append(r["width"])
    assert len(rows) == len(view.rule_rows)
    for widths in rows.values():
        assert sum(widths) == pytest.approx(style.cell_width, abs=1e-3)


def test_leur_has_vote_column_and_black_line(hand_rules, hand_forest, iris):
    view = local_used_rules(hand_rules, hand_forest, X13)
    svg = render(view, iris, hand_forest, ruleset=hand_rules)
    root = ET.fromstring(svg)
    lines = [el for el in root.iter(f"{SVG_NS}line")]
    black = [l for l in lines if l.attrib.get("stroke") == "#000000"]
    assert len(black) == 1
    dashed = [l for l in lines if "stroke-dasharray" in l.attrib]
    assert len(dashed) == len(view.feature_cols)


def test_lesc_change_cells(hand_rules, hand_forest, iris):
    style = RenderStyle()
    view = local_smallest_changes(hand_rules, hand_forest, iris, X13)
    svg = render(view, iris, hand_forest, style, ruleset=hand_rules)
    regions = hit_regions(view, iris, style)
    matrix_right = max(r["x"] + r["width"] for r in regions)
    rects = [r for r in _rects(svg) if r["x"] + r["width"] <= matrix_right + 1e-6]
    greens = [r for r in rects if r["fill"] == style.positive_change_color]
    purples = [r for r in rects if r["fill"] == style.negative_change_color]
    # x13's three changes: one decrease (petal length) and two increases
    assert len(purples) == 1
    assert len(greens) == 2
    # the purple bar spans from the bound to the instance position
    region = next(
        r for r in hit_regions(view, iris, style)
        if r["rule_id"] == 5 and r["feature"] == 2
    )
    bar = purples[0]
    lo = (bar["x"] - region["x"]) / region["width"]
    hi = (bar["x"] + bar["width"] - region["x"]) / region["width"]
    span = iris.feature_max[2] - iris.feature_min[2]
    assert lo == pytest.approx((4.85 - iris.feature_min[2]) / span, abs=1e-6)
    assert hi == pytest.approx((4.9 - iris.feature_min[2]) / span, abs=1e-6)


def test_hit_region_feature_is_dataset_index(hand_rules, hand_forest, iris):
    view = global_view(hand_rules)
    regions = hit_regions(view, iris)
    feats = {r["feature"] for r in regions}
    assert feats == set(view.feature_cols)


def test_style_validation(hand_rules, hand_forest, iris):
    view = global_view(hand_rules)
    with pytest.raises(RenderError):
        render(view, iris, hand_forest, RenderStyle(cell_width=0), ruleset=hand_rules)
    style = RenderStyle(palette="colorblind")
    svg = render(view, iris, hand_forest, style, ruleset=hand_rules)
    assert "#0072b2" in svg


def test_view_dataset_mismatch_rejected(hand_rules, hand_forest, iris):
    view = global_view(hand_rules)
    view.header = view.header[:2]
    with pytest.raises(RenderError):
        render(view, iris, hand_forest, ruleset=hand_rules)


def test_golden_iris_global(hand_rules, hand_forest, iris):
    """Frozen output: regenerate with scripts/make_golden.py after deliberate
    renderer changes and re-inspect before committing."""
    view = global_view(hand_rules)
    svg = render(view, iris, hand_forest, ruleset=hand_rules)
    golden = (GOLDEN / "iris_global.svg").read_text()
    assert svg == golden
