"""Decision paths re-expressed as disjoint per-feature interval rules.

Every root->leaf path of every tree becomes one rule: for each feature used
on the path, the interval (alpha, beta] its tests pin down; missing bounds
fall back to the feature's extrema over the whole dataset. A rule also
carries the leaf's normalized class distribution (certainty), its argmax
class, and coverage over the train split.

Membership is half-open, (alpha, beta], closed at alpha when alpha is the
global feature minimum. Under that convention rule evaluation is exactly
tree traversal for any instance inside the dataset's bounding box, so the
rules of one tree are disjoint and total there.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvariantError
from .forest import Forest, LeafNode

_EMPTY = np.nan  # predicate absent marker inside the packed alpha/beta arrays


@dataclass(frozen=True)
class Interval:
    alpha: float
    beta: float


@dataclass
class VectorRule:
    rule_id: int
    tree_id: int
    leaf_id: int
    predicates: list[Interval | None]  # length M, None where the path skips the feature
    certainty: np.ndarray              # (J,) leaf distribution
    class_index: int
    coverage: float

    def n_predicates(self) -> int:
        return sum(p is not None for p in self.predicates)

    def to_json(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "tree_id": self.tree_id,
            "leaf_id": self.leaf_id,
            "predicates": [
                None if p is None else {"alpha": p.alpha, "beta": p.beta}
                for p in self.predicates
            ],
            "certainty": [float(c) for c in self.certainty],
            "class_index": self.class_index,
            "coverage": self.coverage,
        }


class RuleSet:
    """All rules of a forest plus packed arrays for vectorized matching."""

    def __init__(self, rules: list[VectorRule], forest: Forest, dataset: Dataset):
        self.rules = rules
        self.forest = forest
        self.dataset = dataset
        self.forest_id = uuid.uuid4().hex
        self.by_tree: dict[int, list[int]] = {}
        for r in rules:
            self.by_tree.setdefault(r.tree_id, []).append(r.rule_id)
        m = dataset.n_features
        z = len(rules)
        self._alpha = np.full((z, m), _EMPTY)
        self._beta = np.full((z, m), _EMPTY)
        for r in rules:
            for f, p in enumerate(r.predicates):
                if p is not None:
                    self._alpha[r.rule_id, f] = p.alpha
                    self._beta[r.rule_id, f] = p.beta
        self._present = ~np.isnan(self._alpha)

    def __len__(self) -> int:
        return len(self.rules)

    def classes(self) -> np.ndarray:
        return np.array([r.class_index for r in self.rules])

    def match_matrix(self, instances: np.ndarray) -> np.ndarray:
        """(B, Z) boolean: does rule z match instance b."""
        X = np.atleast_2d(np.asarray(instances, dtype=np.float64))
        fmin = self.dataset.feature_min
        a, b, present = self._alpha, self._beta, self._present
        xv = X[:, None, :]  # (B, 1, M)
        lower = (xv > a) | ((a == fmin) & (xv >= a))
        ok = ~present | (lower & (xv <= b))
        return ok.all(axis=2)

    def export_jsonl(self) -> str:
        return "".join(json.dumps(r.to_json()) + "\n" for r in self.rules)


def extract_rules(forest: Forest, dataset: Dataset) -> RuleSet:
    """One rule per leaf, numbered depth-first within trees, trees in order."""
    forest.check_compatible(dataset)
    fmin, fmax = dataset.feature_min, dataset.feature_max
    train = dataset.instances[dataset.train_mask]
    train_labels = dataset.labels[dataset.train_mask]
    class_totals = np.bincount(train_labels, minlength=dataset.n_classes)

    rules: list[VectorRule] = []
    for k, tree in enumerate(forest.trees):
        for leaf_id in tree.leaf_ids():
            leaf = tree.nodes[leaf_id]
            assert isinstance(leaf, LeafNode)
            alpha = np.full(dataset.n_features, np.nan)
            beta = np.full(dataset.n_features, np.nan)
            used = np.zeros(dataset.n_features, dtype=bool)
            for feature, threshold, went_left in tree.path_to(leaf_id):
                used[feature] = True
                if went_left:  # test was "<= threshold": tightens the upper limit
                    if np.isnan(beta[feature]) or threshold < beta[feature]:
                        beta[feature] = threshold
                else:          # test was "> threshold": raises the lower limit
                    if np.isnan(alpha[feature]) or threshold > alpha[feature]:
                        alpha[feature] = threshold
            predicates: list[Interval | None] = []
            for f in range(dataset.n_features):
                if not used[f]:
                    predicates.append(None)
                    continue
                a = fmin[f] if np.isnan(alpha[f]) else alpha[f]
                b = fmax[f] if np.isnan(beta[f]) else beta[f]
                predicates.append(Interval(float(a), float(b)))
            certainty = leaf.distribution()
            class_index = int(np.argmax(certainty))
            rule = VectorRule(
                rule_id=len(rules),
                tree_id=k,
                leaf_id=leaf_id,
                predicates=predicates,
                certainty=certainty,
                class_index=class_index,
                coverage=0.0,
            )
            rules.append(rule)

    ruleset = RuleSet(rules, forest, dataset)
    # Coverage: among train instances of the rule's own class, the fraction
    # the rule is valid for. A class absent from the train split yields 0.
    if len(train):
        matches = ruleset.match_matrix(train)  # (n_train, Z)
        for r in rules:
            same_class = train_labels == r.class_index
            total = class_totals[r.class_index]
            r.coverage = float(matches[same_class, r.rule_id].sum() / total) if total else 0.0
    return ruleset


def rule_matches(rule: VectorRule, instance, dataset: Dataset) -> bool:
    """True iff every present predicate holds: alpha < x <= beta, with the
    lower bound closed when alpha is the global feature minimum."""
    x = dataset.check_instance(instance)
    for f, p in enumerate(rule.predicates):
        if p is None:
            continue
        above = x[f] > p.alpha or (p.alpha == dataset.feature_min[f] and x[f] >= p.alpha)
        if not (above and x[f] <= p.beta):
            return False
    return True


def used_rule(ruleset: RuleSet, tree_id: int, instance) -> VectorRule:
    """The unique rule of one tree matching the instance.

    Zero or multiple matches would contradict per-tree disjointness and are
    raised as defects.
    """
    x = ruleset.dataset.check_instance(instance)
    hits = [
        rid for rid in ruleset.by_tree[tree_id]
        if rule_matches(ruleset.rules[rid], x, ruleset.dataset)
    ]
    if len(hits) != 1:
        raise InvariantError(
            f"tree {tree_id}: {len(hits)} rules match instance {x.tolist()} (expected 1)"
        )
    return ruleset.rules[hits[0]]


def used_rules(ruleset: RuleSet, instance) -> list[VectorRule]:
    """One used rule per tree, in tree order."""
    return [used_rule(ruleset, k, instance) for k in range(ruleset.forest.n_trees)]
