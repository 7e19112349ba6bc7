import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulegrid import (
    GE,
    LE_SC,
    LE_UR,
    EmptyViewError,
    RuleFilter,
    StaleChangeError,
    TrainParams,
    apply_changes,
    export_forest,
    extract_rules,
    global_view,
    import_forest,
    local_smallest_changes,
    local_used_rules,
    predict,
    smallest_changes,
    train_forest,
    used_rule,
)
from rulegrid.explain import refresh_cumulative_votes
from tests import oracles
from tests.conftest import X13, synthetic_dataset


# --- global view ------------------------------------------------------------


def test_global_view_unfiltered(hand_rules):
    view = global_view(hand_rules)
    assert view.kind == GE
    assert view.rule_rows == list(range(10))
    assert sorted(view.feature_cols) == [0, 2, 3]  # sepal width is never split on
    assert len(view.header) == 4


def test_global_view_all_features_on_trained(iris_k3, iris):
    rs = extract_rules(iris_k3, iris)
    view = global_view(rs)
    assert len(view.rule_rows) == len(rs)


def test_impossible_threshold_raises(hand_rules):
    with pytest.raises(EmptyViewError):
        global_view(hand_rules, RuleFilter(min_coverage=1.1))


def test_filter_equals_linear_scan_oracle():
    ds = synthetic_dataset(7)
    forest = train_forest(ds, TrainParams(trees=5, max_depth=5, rng_seed=7))
    rs = extract_rules(forest, ds)
    view = global_view(rs, RuleFilter(min_coverage=0.5))
    expected = [r.rule_id for r in rs.rules if r.coverage >= 0.5]
    assert view.rule_rows == expected
    view2 = global_view(rs, RuleFilter(min_certainty=0.9, classes=[0, 2]))
    expected2 = [
        r.rule_id
        for r in rs.rules
        if max(r.certainty) >= 0.9 and r.class_index in (0, 2)
    ]
    assert view2.rule_rows == expected2


def test_explicit_rule_ids_override(hand_rules):
    view = global_view(hand_rules, RuleFilter(min_coverage=1.1, explicit_rule_ids=[4, 2]))
    assert view.rule_rows == [4, 2]


def test_feature_cols_subset_of_used(hand_rules):
    view = global_view(hand_rules, RuleFilter(explicit_rule_ids=[0]))  # petal width only
    assert view.feature_cols == [3]


# --- local used rules -------------------------------------------------------


def test_x13_used_rules_view(hand_rules, hand_forest):
    view = local_used_rules(hand_rules, hand_forest, X13)
    assert view.kind == LE_UR
    assert view.rule_rows == [2, 6, 8]
    final = view.row_extras[-1]["cumulative_vote"]
    assert final == pytest.approx([0.0, 0.72, 0.28], abs=0.005)
    assert final == list(predict(hand_forest, X13)["probabilities"])


def test_single_tree_decision_fixed_row(iris):
    forest = train_forest(iris, TrainParams(trees=1, max_depth=3, rng_seed=0))
    rs = extract_rules(forest, iris)
    view = local_used_rules(rs, forest, X13)
    assert len(view.rule_rows) == 1
    assert view.decision_fixed_row == 1


def test_final_vote_invariant_under_permutations(hand_rules, hand_forest):
    base = local_used_rules(hand_rules, hand_forest, X13)
    expected = list(predict(hand_forest, X13)["probabilities"])
    for perm in itertools.permutations(range(3)):
        view = local_used_rules(hand_rules, hand_forest, X13)
        view.rule_rows = [base.rule_rows[i] for i in perm]
        view.row_extras = [dict(base.row_extras[i]) for i in perm]
        refresh_cumulative_votes(view, hand_rules)
        assert view.row_extras[-1]["cumulative_vote"] == expected


def test_decision_fixed_row_definition():
    ds = synthetic_dataset(11, n=300, m=4, j=2)
    forest = train_forest(ds, TrainParams(trees=7, max_depth=4, rng_seed=11))
    rs = extract_rules(forest, ds)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(ds.feature_min, ds.feature_max)
        view = local_used_rules(rs, forest, x)
        votes = [e["cumulative_vote"] for e in view.row_extras]
        final = int(np.argmax(votes[-1]))
        dfr = view.decision_fixed_row
        assert all(int(np.argmax(votes[j])) == final for j in range(dfr - 1, len(votes)))
        if dfr > 1:
            assert int(np.argmax(votes[dfr - 2])) != final


# --- smallest changes -------------------------------------------------------


def test_x13_smallest_change_targets(hand_rules, hand_forest, iris):
    changes = smallest_changes(hand_rules, hand_forest, iris, X13)
    assert [cv.target_rule_id for cv in changes] == [3, 5, 9]
    # tree 1: flipping virginica -> versicolor needs only a petal-length drop
    cv = changes[1]
    assert cv.from_class == 2 and cv.to_class == 1
    nonzero = [f for f, d in enumerate(cv.deltas) if d != 0]
    assert nonzero == [2]
    assert cv.deltas[2] < 0
    span = iris.train_max[2] - iris.train_min[2]
    assert cv.change_sum == pytest.approx((4.9 - 4.85) / span, abs=1e-12)


def test_x13_lesc_view_ordered_by_change(hand_rules, hand_forest, iris):
    view = local_smallest_changes(hand_rules, hand_forest, iris, X13)
    assert view.kind == LE_SC
    assert view.rule_rows == [5, 9, 3]  # the petal-length tweak comes first
    sums = [e["change_sum"] for e in view.row_extras]
    assert sums == sorted(sums)
    assert [e["original_class"] for e in view.row_extras] == [2, 1, 1]
    assert [cv.target_rule_id for cv in view.change_vectors] == view.rule_rows


@pytest.mark.parametrize("seed", [0, 5, 9])
def test_smallest_changes_equal_brute_force(seed):
    ds = synthetic_dataset(seed, n=260, m=4, j=3)
    forest = train_forest(ds, TrainParams(trees=5, max_depth=5, rng_seed=seed))
    rs = extract_rules(forest, ds)
    rng = np.random.default_rng(seed + 50)
    for _ in range(12):
        x = rng.uniform(ds.feature_min, ds.feature_max)
        for cv in smallest_changes(rs, forest, ds, x):
            assert cv is not None
            best = oracles.smallest_change(rs, ds, cv.tree_id, x)
            assert cv.change_sum == pytest.approx(best[0], abs=1e-9)
            assert cv.target_rule_id == best[2]
            assert cv.change_sum == pytest.approx(
                math.fsum(abs(d) for d in cv.deltas), abs=1e-12
            )


def test_pure_tree_yields_absent_change(iris):
    doc = {
        "version": 1,
        "feature_names": list(iris.feature_names),
        "class_names": list(iris.class_names),
        "trees": [
            {"nodes": [{"id": 0, "kind": "leaf", "counts": [9, 0, 0]}], "root": 0},
            {
                "nodes": [
                    {"id": 0, "kind": "internal", "feature": 3, "threshold": 0.8, "left": 1, "right": 2},
                    {"id": 1, "kind": "leaf", "counts": [30, 0, 0]},
                    {"id": 2, "kind": "leaf", "counts": [0, 31, 9]},
                ],
                "root": 0,
            },
        ],
        "train_params": {},
    }
    forest = import_forest(doc, iris)
    rs = extract_rules(forest, iris)
    changes = smallest_changes(rs, forest, iris, X13)
    assert changes[0] is None  # single-rule tree cannot flip
    assert changes[1] is not None


# --- apply_changes ----------------------------------------------------------


def test_apply_flips_target_tree(hand_rules, hand_forest, iris):
    changes = smallest_changes(hand_rules, hand_forest, iris, X13)
    for cv in changes:
        out = apply_changes(X13, cv, hand_rules, hand_forest, iris)
        target = hand_rules.rules[cv.target_rule_id]
        landed = used_rule(hand_rules, cv.tree_id, out["new_instance"])
        assert landed.rule_id == cv.target_rule_id
        assert landed.class_index == cv.to_class
        # the flipped tree votes exactly the target rule's certainty
        assert list(target.certainty) == [
            pytest.approx(v) for v in _tree_vote(hand_forest, cv.tree_id, out["new_instance"])
        ]


def _tree_vote(forest, tree_id, x):
    tree = forest.trees[tree_id]
    leaf = tree.nodes[tree.leaf_for(np.asarray(x))]
    return list(leaf.distribution())


def test_apply_boundary_zero_delta():
    ds = synthetic_dataset(3, n=100, m=1, j=2)
    doc = {
        "version": 1,
        "feature_names": ["f0"],
        "class_names": ["c0", "c1"],
        "trees": [
            {
                "nodes": [
                    {"id": 0, "kind": "internal", "feature": 0, "threshold": 0.0, "left": 1, "right": 2},
                    {"id": 1, "kind": "leaf", "counts": [4, 0]},
                    {"id": 2, "kind": "leaf", "counts": [0, 4]},
                ],
                "root": 0,
            }
        ],
        "train_params": {},
    }
    ds1 = synthetic_dataset(3, n=120, m=1, j=2)
    forest = import_forest(doc, ds1)
    rs = extract_rules(forest, ds1)
    x = [0.0]  # exactly on the threshold: classified left, flip distance is zero
    cv = smallest_changes(rs, forest, ds1, x)[0]
    assert cv.change_sum == 0.0
    out = apply_changes(x, cv, rs, forest, ds1)
    assert out["new_instance"][0] > 0.0
    assert used_rule(rs, 0, out["new_instance"]).class_index == cv.to_class


def test_apply_rejects_stale_changes(hand_rules, hand_forest, iris):
    changes = smallest_changes(hand_rules, hand_forest, iris, X13)
    other = [5.0, 3.0, 1.4, 0.2]  # a setosa-looking instance
    with pytest.raises(StaleChangeError):
        apply_changes(other, changes[1], hand_rules, hand_forest, iris)
    tampered = smallest_changes(hand_rules, hand_forest, iris, X13)[1]
    tampered.deltas[0] += 0.25
    with pytest.raises(StaleChangeError):
        apply_changes(X13, tampered, hand_rules, hand_forest, iris)


# --- delta normalization ----------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(
    scale=st.floats(0.1, 50.0, allow_nan=False),
    offset=st.floats(-100.0, 100.0, allow_nan=False),
)
def test_delta_invariant_under_affine_rescaling(scale, offset):
    ds = synthetic_dataset(21, n=200, m=3, j=2)
    forest = train_forest(ds, TrainParams(trees=3, max_depth=4, rng_seed=21))
    rs = extract_rules(forest, ds)
    x = ds.feature_min + 0.37 * (ds.feature_max - ds.feature_min)
    base = smallest_changes(rs, forest, ds, x)

    feature = 1
    doc = export_forest(forest)
    for tree in doc["trees"]:
        for node in tree["nodes"]:
            if node["kind"] == "internal" and node["feature"] == feature:
                node["threshold"] = node["threshold"] * scale + offset
    scaled_instances = ds.instances.copy()
    scaled_instances[:, feature] = scaled_instances[:, feature] * scale + offset
    ds2 = type(ds)(
        feature_names=list(ds.feature_names),
        class_names=list(ds.class_names),
        instances=scaled_instances,
        labels=ds.labels.copy(),
        train_mask=ds.train_mask.copy(),
    )
    forest2 = import_forest(doc, ds2)
    rs2 = extract_rules(forest2, ds2)
    x2 = x.copy()
    x2[feature] = x2[feature] * scale + offset
    scaled = smallest_changes(rs2, forest2, ds2, x2)
    for cv1, cv2 in zip(base, scaled):
        assert cv2.change_sum == pytest.approx(cv1.change_sum, rel=1e-9, abs=1e-12)
        for d1, d2 in zip(cv1.deltas, cv2.deltas):
            assert d2 == pytest.approx(d1, rel=1e-9, abs=1e-12)
