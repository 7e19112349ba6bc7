"""Deterministic row/column orderings for explanation views.

All orderings are stable permutations; reordering never changes cell
contents. Rule rows of a used-rules view get their cumulative votes and
decision-fixed row recomputed, since those depend on display order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OrderingError
from .explain import LE_SC, LE_UR, ExplanationView, refresh_cumulative_votes
from .forest import Forest
from .rules import RuleSet

ROW_KEYS = (
    "extraction_order",
    "coverage",
    "certainty",
    "class_and_coverage",
    "class_and_certainty",
    "change_sum",
)
COLUMN_KEYS = ("importance", "dataset_order")

# descending by default for magnitude-like keys; class components always sort
# ascending by class index
_DEFAULT_DESCENDING = {"coverage", "certainty", "class_and_coverage",
                       "class_and_certainty", "importance"}


@dataclass(frozen=True)
class OrderCriterion:
    target: str                  # "rules" | "features"
    key: str
    direction: str | None = None  # "ascending" | "descending" | None (default)

    def __post_init__(self):
        if self.target not in ("rules", "features"):
            raise OrderingError(f"unknown target {self.target!r}")
        keys = ROW_KEYS if self.target == "rules" else COLUMN_KEYS
        if self.key not in keys:
            raise OrderingError(f"key {self.key!r} invalid for target {self.target!r}")
        if self.direction not in (None, "ascending", "descending"):
            raise OrderingError(f"unknown direction {self.direction!r}")

    @property
    def descending(self) -> bool:
        if self.direction is None:
            return self.key in _DEFAULT_DESCENDING
        return self.direction == "descending"

    @staticmethod
    def from_name(target: str, name: str, direction: str | None = None) -> "OrderCriterion":
        """Accepts the kebab-case names used by the CLI and HTTP interfaces."""
        return OrderCriterion(target, name.replace("-", "_"), direction)


def order_rows(view: ExplanationView, criterion: OrderCriterion, ruleset: RuleSet) -> ExplanationView:
    if criterion.target != "rules":
        raise OrderingError("order_rows needs a criterion with target 'rules'")
    if criterion.key == "change_sum" and view.kind != LE_SC:
        raise OrderingError("change_sum ordering only applies to smallest-change views")
    sign = -1.0 if criterion.descending else 1.0

    def sort_key(pos: int):
        rule = ruleset.rules[view.rule_rows[pos]]
        if criterion.key == "extraction_order":
            measure = (sign * rule.rule_id,)
        elif criterion.key == "coverage":
            measure = (sign * rule.coverage,)
        elif criterion.key == "certainty":
            measure = (sign * float(max(rule.certainty)),)
        elif criterion.key == "class_and_coverage":
            measure = (rule.class_index, sign * rule.coverage)
        elif criterion.key == "class_and_certainty":
            measure = (rule.class_index, sign * float(max(rule.certainty)))
        else:  # change_sum
            measure = (sign * view.row_extras[pos]["change_sum"],)
        return measure + (rule.rule_id,)

    order = sorted(range(len(view.rule_rows)), key=sort_key)
    new = ExplanationView(
        kind=view.kind,
        rule_rows=[view.rule_rows[i] for i in order],
        feature_cols=list(view.feature_cols),
        row_extras=[dict(view.row_extras[i]) for i in order],
        header=list(view.header),
        instance=view.instance,
        decision_fixed_row=view.decision_fixed_row,
        change_vectors=(
            [view.change_vectors[i] for i in order] if view.change_vectors else None
        ),
    )
    if new.kind == LE_UR:
        refresh_cumulative_votes(new, ruleset)
    return new


def order_columns(view: ExplanationView, criterion: OrderCriterion, forest: Forest) -> ExplanationView:
    if criterion.target != "features":
        raise OrderingError("order_columns needs a criterion with target 'features'")
    if criterion.key == "importance":
        imps = view.header if forest.importances is None else forest.importances
        sign = -1.0 if criterion.descending else 1.0
        cols = sorted(view.feature_cols, key=lambda f: (sign * float(imps[f]), f))
    else:  # dataset_order
        cols = sorted(view.feature_cols, reverse=criterion.descending)
    new = ExplanationView(
        kind=view.kind,
        rule_rows=list(view.rule_rows),
        feature_cols=cols,
        row_extras=[dict(e) for e in view.row_extras],
        header=list(view.header),
        instance=view.instance,
        decision_fixed_row=view.decision_fixed_row,
        change_vectors=list(view.change_vectors) if view.change_vectors else None,
    )
    return new
