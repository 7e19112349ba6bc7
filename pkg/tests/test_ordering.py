import numpy as np
import pytest

from rulegrid import (
    OrderCriterion,
    OrderingError,
    RuleFilter,
    TrainParams,
    extract_rules,
    global_view,
    local_smallest_changes,
    local_used_rules,
    order_columns,
    order_rows,
    predict,
    train_forest,
)
from tests.conftest import X13, synthetic_dataset


@pytest.fixture(scope="module")
def random_setup():
    ds = synthetic_dataset(33, n=280, m=6, j=3)
    forest = train_forest(ds, TrainParams(trees=6, max_depth=5, rng_seed=33))
    rs = extract_rules(forest, ds)
    return ds, forest, rs


def test_two_element_coverage_sort(hand_rules):
    # rule 2 covers 10/35 of its class, rule 1 24/35: descending puts 1 first
    view = global_view(hand_rules, RuleFilter(explicit_rule_ids=[2, 1]))
    out = order_rows(view, OrderCriterion("rules", "coverage"), hand_rules)
    covs = [e["coverage"] for e in out.row_extras]
    assert covs == sorted(covs, reverse=True)
    assert out.rule_rows == [1, 2]


def test_class_and_coverage_blocks(random_setup):
    ds, forest, rs = random_setup
    view = order_rows(global_view(rs), OrderCriterion("rules", "class_and_coverage"), rs)
    classes = [e["class_index"] for e in view.row_extras]
    assert classes == sorted(classes)  # contiguous ascending class blocks
    for j in set(classes):
        covs = [e["coverage"] for e in view.row_extras if e["class_index"] == j]
        assert covs == sorted(covs, reverse=True)


def test_rows_match_reference_sort(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)

    def reference(key):
        pairs = []
        for rid in view.rule_rows:
            r = rs.rules[rid]
            if key == "coverage":
                pairs.append(((-r.coverage, r.rule_id), rid))
            else:
                pairs.append(((-float(max(r.certainty)), r.rule_id), rid))
        return [rid for _, rid in sorted(pairs)]

    for key in ("coverage", "certainty"):
        got = order_rows(view, OrderCriterion("rules", key), rs).rule_rows
        assert got == reference(key)


def test_ascending_direction(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    up = order_rows(view, OrderCriterion("rules", "coverage", "ascending"), rs)
    covs = [e["coverage"] for e in up.row_extras]
    assert covs == sorted(covs)


def test_extraction_order_restores_identity(random_setup):
    ds, forest, rs = random_setup
    shuffled = order_rows(global_view(rs), OrderCriterion("rules", "certainty"), rs)
    back = order_rows(shuffled, OrderCriterion("rules", "extraction_order"), rs)
    assert back.rule_rows == sorted(back.rule_rows)


def test_columns_match_argsort_oracle(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    got = order_columns(view, OrderCriterion("features", "importance"), forest).feature_cols
    imps = forest.importances
    expected = sorted(view.feature_cols, key=lambda f: (-imps[f], f))
    assert got == expected
    assert got[0] == int(np.argmax([imps[f] if f in view.feature_cols else -1 for f in range(ds.n_features)]))


def test_dataset_order_is_identity(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    got = order_columns(view, OrderCriterion("features", "dataset_order"), forest)
    assert got.feature_cols == sorted(view.feature_cols)


def test_orderings_are_permutations(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    for key in ("coverage", "certainty", "class_and_coverage", "class_and_certainty"):
        out = order_rows(view, OrderCriterion("rules", key), rs)
        assert sorted(out.rule_rows) == sorted(view.rule_rows)
        assert {id(e) for e in out.row_extras} != {id(e) for e in view.row_extras}
    out2 = order_columns(view, OrderCriterion("features", "importance"), forest)
    assert sorted(out2.feature_cols) == sorted(view.feature_cols)


def test_reorder_is_deterministic(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    a = order_rows(view, OrderCriterion("rules", "class_and_certainty"), rs)
    b = order_rows(view, OrderCriterion("rules", "class_and_certainty"), rs)
    assert a.rule_rows == b.rule_rows


def test_leur_reorder_recomputes_votes(hand_rules, hand_forest):
    view = local_used_rules(hand_rules, hand_forest, X13)
    out = order_rows(view, OrderCriterion("rules", "coverage"), hand_rules)
    assert out.rule_rows != view.rule_rows  # coverage order differs from tree order
    assert out.row_extras[-1]["cumulative_vote"] == list(
        predict(hand_forest, X13)["probabilities"]
    )
    first = out.row_extras[0]
    assert first["cumulative_vote"] == first["certainty"]


def test_change_sum_ordering_only_for_lesc(hand_rules, hand_forest, iris):
    ge = global_view(hand_rules)
    with pytest.raises(OrderingError):
        order_rows(ge, OrderCriterion("rules", "change_sum"), hand_rules)
    lesc = local_smallest_changes(hand_rules, hand_forest, iris, X13)
    out = order_rows(lesc, OrderCriterion("rules", "change_sum", "descending"), hand_rules)
    sums = [e["change_sum"] for e in out.row_extras]
    assert sums == sorted(sums, reverse=True)
    assert [cv.target_rule_id for cv in out.change_vectors] == out.rule_rows


def test_invalid_criteria_rejected():
    with pytest.raises(OrderingError):
        OrderCriterion("rules", "importance")
    with pytest.raises(OrderingError):
        OrderCriterion("features", "coverage")
    with pytest.raises(OrderingError):
        OrderCriterion("rules", "coverage", "sideways")
    with pytest.raises(OrderingError):
        OrderCriterion("cells", "coverage")


def test_kebab_case_names():
    c = OrderCriterion.from_name("rules", "class-and-coverage")
    assert c.key == "class_and_coverage"
    assert OrderCriterion.from_name("features", "dataset-order").key == "dataset_order"


def test_wrong_target_function_pairing(random_setup):
    ds, forest, rs = random_setup
    view = global_view(rs)
    with pytest.raises(OrderingError):
        order_rows(view, OrderCriterion("features", "importance"), rs)
    with pytest.raises(OrderingError):
        order_columns(view, OrderCriterion("rules", "coverage"), forest)
