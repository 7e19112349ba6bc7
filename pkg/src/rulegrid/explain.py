"""The three explanation views and the smallest-change counterfactual search.

GE: a filtered overview of all rules. LE/UR: the one rule per tree that
classified an instance, with the committee's cumulative vote. LE/SC: per
tree, the opposite-class rule reachable with the least total normalized
feature change, and the edits that would get there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import EmptyViewError, InputError, InvariantError, StaleChangeError
from .forest import Forest, mdi_importance, mean_distribution, predict
from .rules import RuleSet, VectorRule, rule_matches, used_rule, used_rules

GE = "GE"
LE_UR = "LE_UR"
LE_SC = "LE_SC"

# Strict-inequality crossing on increase: the new value sits this fraction of
# the train range past the violated lower bound.
CROSSING_EPSILON = 1e-9


@dataclass
class RuleFilter:
    min_coverage: float | None = None
    min_certainty: float | None = None   # compared against max(certainty)
    classes: list[int] | None = None
    explicit_rule_ids: list[int] | None = None


@dataclass
class ChangeVector:
    target_rule_id: int
    tree_id: int
    deltas: list[float]      # signed, normalized by train range; 0 where satisfied
    change_sum: float
    from_class: int
    to_class: int

    def to_json(self) -> dict:
        return {
            "target_rule_id": self.target_rule_id,
            "tree_id": self.tree_id,
            "deltas": [float(d) for d in self.deltas],
            "change_sum": self.change_sum,
            "from_class": self.from_class,
            "to_class": self.to_class,
        }

    @staticmethod
    def from_json(doc: dict) -> "ChangeVector":
        return ChangeVector(
            target_rule_id=doc["target_rule_id"],
            tree_id=doc["tree_id"],
            deltas=[float(d) for d in doc["deltas"]],
            change_sum=float(doc["change_sum"]),
            from_class=doc["from_class"],
            to_class=doc["to_class"],
        )


@dataclass
class ExplanationView:
    kind: str                          # GE | LE_UR | LE_SC
    rule_rows: list[int]
    feature_cols: list[int]
    row_extras: list[dict]
    header: list[float]                # full M-vector of importances
    instance: list[float] | None = None
    decision_fixed_row: int | None = None  # 1-based, LE_UR only
    change_vectors: list[ChangeVector] | None = None  # aligned with rows, LE_SC only

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind,
            "rule_rows": list(self.rule_rows),
            "feature_cols": list(self.feature_cols),
            "row_extras": self.row_extras,
            "header": [float(v) for v in self.header],
            "instance": self.instance,
            "decision_fixed_row": self.decision_fixed_row,
        }
        if self.kind == LE_SC:
            doc["change_vectors"] = [
                cv.to_json() for cv in (self.change_vectors or [])
            ]
        return doc

    @staticmethod
    def from_json(doc: dict) -> "ExplanationView":
        kind = doc.get("kind")
        if kind not in (GE, LE_UR, LE_SC):
            raise InputError(f"unknown view kind {kind!r}")
        changes = None
        if kind == LE_SC:
            changes = [ChangeVector.from_json(c) for c in doc.get("change_vectors", [])]
        return ExplanationView(
            kind=kind,
            rule_rows=[int(r) for r in doc["rule_rows"]],
            feature_cols=[int(f) for f in doc["feature_cols"]],
            row_extras=list(doc["row_extras"]),
            header=[float(v) for v in doc["header"]],
            instance=doc.get("instance"),
            decision_fixed_row=doc.get("decision_fixed_row"),
            change_vectors=changes,
        )


def _importances(ruleset: RuleSet) -> np.ndarray:
    forest = ruleset.forest
    if forest.importances is None:
        forest.importances = mdi_importance(forest, ruleset.dataset)
    return forest.importances


def _feature_cols(ruleset: RuleSet, rule_ids: list[int]) -> list[int]:
    """Features used by at least one selected rule, most important first."""
    used = set()
    for rid in rule_ids:
        for f, p in enumerate(ruleset.rules[rid].predicates):
            if p is not None:
                used.add(f)
    imps = _importances(ruleset)
    return sorted(used, key=lambda f: (-imps[f], f))


def _base_extras(rule: VectorRule) -> dict:
    return {
        "rule_id": rule.rule_id,
        "tree_id": rule.tree_id,
        "coverage": rule.coverage,
        "certainty": [float(c) for c in rule.certainty],
        "class_index": rule.class_index,
    }


# ---------------------------------------------------------------------------
# Global explanation
# ---------------------------------------------------------------------------


def global_view(ruleset: RuleSet, rule_filter: RuleFilter | None = None) -> ExplanationView:
    """Overview matrix: rules passing the filter, in extraction order."""
    f = rule_filter or RuleFilter()
    if f.explicit_rule_ids is not None:
        for rid in f.explicit_rule_ids:
            if not 0 <= rid < len(ruleset):
                raise InputError(f"unknown rule id {rid}")
        selected = list(f.explicit_rule_ids)
    else:
        selected = []
        for r in ruleset.rules:
            if f.min_coverage is not None and r.coverage < f.min_coverage:
                continue
            if f.min_certainty is not None and max(r.certainty) < f.min_certainty:
                continue
            if f.classes is not None and r.class_index not in f.classes:
                continue
            selected.append(r.rule_id)
    if not selected:
        raise EmptyViewError("rule filter selected zero rules")
    return ExplanationView(
        kind=GE,
        rule_rows=selected,
        feature_cols=_feature_cols(ruleset, selected),
        row_extras=[_base_extras(ruleset.rules[rid]) for rid in selected],
        header=list(_importances(ruleset)),
    )


# ---------------------------------------------------------------------------
# Local explanation: used rules
# ---------------------------------------------------------------------------


def refresh_cumulative_votes(view: ExplanationView, ruleset: RuleSet) -> None:
    """Recompute cumulative votes and the decision-fixed row for the current
    row order. The vote at row i averages the certainties of rows 1..i; the
    final row therefore always equals the committee's decision."""
    certs = [np.asarray(ruleset.rules[rid].certainty) for rid in view.rule_rows]
    votes = [mean_distribution(certs[: i + 1]) for i in range(len(certs))]
    for extras, vote in zip(view.row_extras, votes):
        extras["cumulative_vote"] = [float(v) for v in vote]
    final = int(np.argmax(votes[-1]))
    fixed = 1
    for j in range(len(votes) - 1, -1, -1):
        if int(np.argmax(votes[j])) != final:
            fixed = j + 2  # votes[j] is row j+1 (1-based); stability starts after it
            break
    view.decision_fixed_row = fixed


def local_used_rules(ruleset: RuleSet, forest: Forest, instance) -> ExplanationView:
    """The K rules that classified the instance, one per tree, tree order."""
    x = ruleset.dataset.check_instance(instance)
    rows = used_rules(ruleset, x)
    view = ExplanationView(
        kind=LE_UR,
        rule_rows=[r.rule_id for r in rows],
        feature_cols=_feature_cols(ruleset, [r.rule_id for r in rows]),
        row_extras=[_base_extras(r) for r in rows],
        header=list(_importances(ruleset)),
        instance=[float(v) for v in x],
    )
    refresh_cumulative_votes(view, ruleset)
    return view


# ---------------------------------------------------------------------------
# Local explanation: smallest changes
# ---------------------------------------------------------------------------


def _predicate_deltas(
    rule: VectorRule, x: np.ndarray, dataset: Dataset
) -> tuple[list[float], float]:
    """Signed normalized change per feature to make the rule true for x.

    Zero where the predicate is absent or already satisfied; positive when x
    must increase past alpha, negative when it must decrease to beta. The
    normalizer is the feature's train-split range.
    """
    deltas = [0.0] * len(rule.predicates)
    fmin = dataset.feature_min
    for f, p in enumerate(rule.predicates):
        if p is None:
            continue
        above = x[f] > p.alpha or (p.alpha == fmin[f] and x[f] >= p.alpha)
        if above and x[f] <= p.beta:
            continue
        span = dataset.train_max[f] - dataset.train_min[f]
        if span == 0:  # degenerate: constant train feature, leave unnormalized
            span = 1.0
        dist = min(abs(p.alpha - x[f]), abs(p.beta - x[f])) / span
        deltas[f] = dist if x[f] <= p.alpha else -dist
    return deltas, math.fsum(abs(d) for d in deltas)


def smallest_changes(
    ruleset: RuleSet, forest: Forest, dataset: Dataset, instance
) -> list[ChangeVector | None]:
    """Per tree, the opposite-class rule with minimal total change.

    Ties break to the candidate with higher certainty of its own class, then
    the lower rule id. A tree with no opposite-class rule yields None.
    """
    x = dataset.check_instance(instance)
    out: list[ChangeVector | None] = []
    for k in range(forest.n_trees):
        current = used_rule(ruleset, k, x)
        best: tuple[float, float, int] | None = None
        best_cv: ChangeVector | None = None
        for rid in ruleset.by_tree[k]:
            cand = ruleset.rules[rid]
            if cand.class_index == current.class_index:
                continue
            deltas, total = _predicate_deltas(cand, x, dataset)
            key = (total, -float(cand.certainty[cand.class_index]), rid)
            if best is None or key < best:
                best = key
                best_cv = ChangeVector(
                    target_rule_id=rid,
                    tree_id=k,
                    deltas=deltas,
                    change_sum=total,
                    from_class=current.class_index,
                    to_class=cand.class_index,
                )
        out.append(best_cv)
    return out


def local_smallest_changes(
    ruleset: RuleSet, forest: Forest, dataset: Dataset, instance
) -> ExplanationView:
    """LE/SC matrix: one row per tree that can flip, smallest change first."""
    x = dataset.check_instance(instance)
    changes = [cv for cv in smallest_changes(ruleset, forest, dataset, x) if cv is not None]
    if not changes:
        raise EmptyViewError("no tree has an opposite-class rule")
    changes.sort(key=lambda cv: (cv.change_sum, cv.target_rule_id))
    extras = []
    for cv in changes:
        e = _base_extras(ruleset.rules[cv.target_rule_id])
        e["change_sum"] = cv.change_sum
        e["original_class"] = cv.from_class
        extras.append(e)
    return ExplanationView(
        kind=LE_SC,
        rule_rows=[cv.target_rule_id for cv in changes],
        feature_cols=_feature_cols(ruleset, [cv.target_rule_id for cv in changes]),
        row_extras=extras,
        header=list(_importances(ruleset)),
        instance=[float(v) for v in x],
        change_vectors=changes,
    )


def apply_changes(
    instance, change: ChangeVector, ruleset: RuleSet, forest: Forest, dataset: Dataset
) -> dict:
    """Materialize a change vector: nudge each violated feature just past the
    bound so the target tree's used rule becomes the target rule."""
    x = dataset.check_instance(instance)
    target = ruleset.rules[change.target_rule_id]
    if target.tree_id != change.tree_id or target.class_index != change.to_class:
        raise StaleChangeError("change vector does not match the rule set")
    current = used_rule(ruleset, change.tree_id, x)
    if current.class_index != change.from_class:
        raise StaleChangeError(
            f"instance is now classified {current.class_index} by tree "
            f"{change.tree_id}, change expected {change.from_class}"
        )
    deltas, _ = _predicate_deltas(target, x, dataset)
    if any(abs(a - b) > 1e-12 for a, b in zip(deltas, change.deltas)):
        raise StaleChangeError("change vector was computed for a different instance")

    new_x = x.copy()
    for f, d in enumerate(deltas):
        p = target.predicates[f]
        if d == 0.0 and (p is None or rule_matches_feature(p, x[f], dataset, f)):
            continue
        assert p is not None
        if x[f] <= p.alpha:  # move up, strictly past alpha
            step = CROSSING_EPSILON * (dataset.train_max[f] - dataset.train_min[f])
            xp = p.alpha + step
            if xp > p.beta:
                xp = p.beta
            if xp <= p.alpha:  # step underflowed at this magnitude
                xp = np.nextafter(p.alpha, np.inf)
            new_x[f] = xp
        else:                # move down; beta itself is inside (alpha, beta]
            new_x[f] = p.beta

    landed = used_rule(ruleset, change.tree_id, new_x)
    if landed.rule_id != target.rule_id:
        raise InvariantError(
            f"materialized instance reached rule {landed.rule_id}, "
            f"expected {target.rule_id}"
        )
    return {
        "new_instance": [float(v) for v in new_x],
        "old_prediction": _prediction_json(predict(forest, x)),
        "new_prediction": _prediction_json(predict(forest, new_x)),
    }


def rule_matches_feature(p, value: float, dataset: Dataset, f: int) -> bool:
    above = value > p.alpha or (p.alpha == dataset.feature_min[f] and value >= p.alpha)
    return above and value <= p.beta


def _prediction_json(pred: dict) -> dict:
    return {
        "probabilities": [float(v) for v in pred["probabilities"]],
        "class": pred["class"],
    }
