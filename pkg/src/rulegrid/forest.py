"""Binary threshold forests: CART training, traversal, soft voting, MDI, JSON I/O.

Trees test ``x[feature] <= threshold``: true goes left, false right. Leaves
keep the raw class counts of the training instances that reached them.
Internal nodes additionally keep those counts while training so impurity
bookkeeping can be replayed; the counts are not serialized, and for imported
forests they are recomputed by pushing the train split down each tree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import InputError, ModelJsonError, SchemaError

FOREST_JSON_VERSION = 1


@dataclass
class InternalNode:
    feature: int
    threshold: float
    left: int
    right: int
    class_counts: np.ndarray | None = None  # training bookkeeping, not serialized


@dataclass
class LeafNode:
    class_counts: np.ndarray

    def distribution(self) -> np.ndarray:
        total = self.class_counts.sum()
        return self.class_counts / total


Node = InternalNode | LeafNode


@dataclass
class DecisionTree:
    nodes: list[Node]
    root: int = 0

    def leaf_ids(self) -> list[int]:
        """Leaf ids in depth-first order, left child before right."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            i = stack.pop()
            node = self.nodes[i]
            if isinstance(node, LeafNode):
                out.append(i)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def leaf_for(self, x) -> int:
        """Traverse to the leaf id for instance x (<= goes left)."""
        i = self.root
        node = self.nodes[i]
        while isinstance(node, InternalNode):
            i = node.left if x[node.feature] <= node.threshold else node.right
            node = self.nodes[i]
        return i

    def path_to(self, leaf_id: int) -> list[tuple[int, float, bool]]:
        """Tests on the root->leaf path as (feature, threshold, went_left)."""
        parent: dict[int, tuple[int, bool]] = {}
        stack = [self.root]
        while stack:
            i = stack.pop()
            node = self.nodes[i]
            if isinstance(node, InternalNode):
                parent[node.left] = (i, True)
                parent[node.right] = (i, False)
                stack.append(node.left)
                stack.append(node.right)
        tests: list[tuple[int, float, bool]] = []
        i = leaf_id
        while i in parent:
            j, went_left = parent[i]
            node = self.nodes[j]
            assert isinstance(node, InternalNode)
            tests.append((node.feature, node.threshold, went_left))
            i = j
        tests.reverse()
        return tests

    def depth(self) -> int:
        def rec(i: int) -> int:
            node = self.nodes[i]
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(rec(node.left), rec(node.right))

        return rec(self.root)


@dataclass
class TrainParams:
    trees: int = 16
    max_depth: int | None = None
    features_per_split: int | None = None  # None -> ceil(sqrt(M))
    bootstrap: bool = True
    rng_seed: int = 0

    def resolve_features_per_split(self, n_features: int) -> int:
        if self.features_per_split is None:
            return math.ceil(math.sqrt(n_features))
        return self.features_per_split


@dataclass
class Forest:
    trees: list[DecisionTree]
    feature_names: list[str]
    class_names: list[str]
    train_params: dict = field(default_factory=dict)
    importances: np.ndarray | None = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def total_leaves(self) -> int:
        return sum(len(t.leaf_ids()) for t in self.trees)

    def check_compatible(self, dataset: Dataset) -> None:
        if dataset.n_features != self.n_features or dataset.n_classes != self.n_classes:
            raise SchemaError(
                f"forest expects M={self.n_features}, J={self.n_classes}; dataset has "
                f"M={dataset.n_features}, J={dataset.n_classes}"
            )


def gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray, n_classes: int):
    """Gini-minimizing (feature, midpoint threshold) over the given features.

    Returns (feature, threshold) or None when no feature has two distinct
    values. Deterministic: features scanned in ascending order, first-best kept.
    """
    n = len(y)
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), y] = 1.0
    best_score = np.inf
    best: tuple[int, float] | None = None
    for f in features:
        vals = X[:, f]
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        cuts = np.flatnonzero(v[:-1] < v[1:])  # split after position i
        if len(cuts) == 0:
            continue
        prefix = np.cumsum(onehot[order], axis=0)
        left = prefix[cuts]                    # (C, J) counts left of each cut
        total = prefix[-1]
        right = total - left
        nl = left.sum(axis=1)
        nr = right.sum(axis=1)
        gl = 1.0 - (left * left).sum(axis=1) / (nl * nl)
        gr = 1.0 - (right * right).sum(axis=1) / (nr * nr)
        weighted = (nl * gl + nr * gr) / n
        i = int(np.argmin(weighted))
        if weighted[i] < best_score:
            best_score = float(weighted[i])
            cut = cuts[i]
            best = (int(f), float((v[cut] + v[cut + 1]) / 2.0))
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    max_depth: int | None,
    k_features: int,
    n_classes: int,
    rng: np.random.Generator,
    nodes: list[Node],
) -> int:
    counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
    node_id = len(nodes)
    nodes.append(LeafNode(counts))  # placeholder, may become internal
    pure = np.count_nonzero(counts) <= 1
    if pure or len(idx) < 2 or (max_depth is not None and depth >= max_depth):
        return node_id
    features = np.sort(rng.choice(X.shape[1], size=k_features, replace=False))
    split = _best_split(X[idx], y[idx], features, n_classes)
    if split is None:
        return node_id
    f, thr = split
    go_left = X[idx, f] <= thr
    left_id = _grow(X, y, idx[go_left], depth + 1, max_depth, k_features, n_classes, rng, nodes)
    right_id = _grow(X, y, idx[~go_left], depth + 1, max_depth, k_features, n_classes, rng, nodes)
    nodes[node_id] = InternalNode(f, thr, left_id, right_id, class_counts=counts)
    return node_id


def train_forest(dataset: Dataset, params: TrainParams) -> Forest:
    """Grow a CART/Gini forest on the dataset's train split.

    Each tree draws from an independently seeded stream (rng_seed, tree index),
    so results do not depend on training order.
    """
    train_idx = dataset.train_indices
    if len(train_idx) == 0:
        raise SchemaError("train split is empty")
    if params.max_depth is not None and params.max_depth < 1:
        raise SchemaError(f"max_depth must be >= 1, got {params.max_depth}")
    if params.trees < 1:
        raise SchemaError("need at least 1 tree")
    k = params.resolve_features_per_split(dataset.n_features)
    if not 1 <= k <= dataset.n_features:
        raise SchemaError(f"features_per_split {k} not in [1, {dataset.n_features}]")

    X, y = dataset.instances, dataset.labels
    trees: list[DecisionTree] = []
    for t in range(params.trees):
        rng = np.random.default_rng([params.rng_seed, t])
        if params.bootstrap:
            idx = train_idx[rng.integers(0, len(train_idx), size=len(train_idx))]
        else:
            idx = train_idx
        nodes: list[Node] = []
        root = _grow(X, y, idx, 0, params.max_depth, k, dataset.n_classes, rng, nodes)
        trees.append(DecisionTree(nodes=nodes, root=root))

    forest = Forest(
        trees=trees,
        feature_names=list(dataset.feature_names),
        class_names=list(dataset.class_names),
        train_params={
            "trees": params.trees,
            "max_depth": params.max_depth,
            "features_per_split": k,
            "bootstrap": params.bootstrap,
            "rng_seed": params.rng_seed,
        },
    )
    forest.importances = mdi_importance(forest)
    return forest


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def predict(forest: Forest, instance) -> dict:
    """Soft-vote: mean of per-tree normalized leaf distributions.

    Per-class sums use math.fsum, so the result is identical under any
    ordering of the trees. Ties at argmax break to the lowest class index.
    """
    x = np.asarray(instance, dtype=np.float64)
    if x.shape != (forest.n_features,):
        raise InputError(f"instance has {x.size} values, expected {forest.n_features}")
    if not np.all(np.isfinite(x)):
        raise InputError("instance contains non-finite values")
    dists = []
    for tree in forest.trees:
        leaf = tree.nodes[tree.leaf_for(x)]
        assert isinstance(leaf, LeafNode)
        dists.append(leaf.distribution())
    probs = mean_distribution(dists)
    return {"probabilities": probs, "class": int(np.argmax(probs))}


def mean_distribution(dists: list[np.ndarray]) -> np.ndarray:
    """Order-independent mean of probability vectors (exactly-rounded sums)."""
    k = len(dists)
    return np.array([math.fsum(d[j] for d in dists) / k for j in range(len(dists[0]))])


def accuracy(forest: Forest, dataset: Dataset, indices=None) -> float:
    idx = dataset.test_indices if indices is None else np.asarray(indices)
    if len(idx) == 0:
        raise SchemaError("no instances to score")
    hits = sum(
        predict(forest, dataset.instances[i])["class"] == dataset.labels[i] for i in idx
    )
    return hits / len(idx)


# ---------------------------------------------------------------------------
# MDI feature importance
# ---------------------------------------------------------------------------


def _recorded_counts(tree: DecisionTree) -> dict[int, np.ndarray] | None:
    """Per-node class counts kept by the trainer; None when any are missing."""
    counts: dict[int, np.ndarray] = {}
    for i, node in enumerate(tree.nodes):
        if node.class_counts is None:
            return None
        counts[i] = node.class_counts
    return counts


def _replayed_counts(
    tree: DecisionTree, X: np.ndarray, y: np.ndarray, n_classes: int
) -> dict[int, np.ndarray]:
    """Class counts at every node from pushing (X, y) down the tree. Kept
    outside the nodes: leaf counts are the model and must not be touched."""
    counts = {i: np.zeros(n_classes) for i in range(len(tree.nodes))}
    for x, label in zip(X, y):
        i = tree.root
        counts[i][label] += 1
        node = tree.nodes[i]
        while isinstance(node, InternalNode):
            i = node.left if x[node.feature] <= node.threshold else node.right
            counts[i][label] += 1
            node = tree.nodes[i]
    return counts


def _tree_raw_importances(
    tree: DecisionTree, n_features: int, counts: dict[int, np.ndarray]
) -> np.ndarray:
    """Sum of weighted Gini decreases per feature over the tree's splits."""
    out = np.zeros(n_features)
    n_root = counts[tree.root].sum()
    if n_root <= 0:
        return out
    for i, node in enumerate(tree.nodes):
        if not isinstance(node, InternalNode):
            continue
        c_t, c_l, c_r = counts[i], counts[node.left], counts[node.right]
        n_t = c_t.sum()
        if n_t <= 0:
            continue
        decrease = gini(c_t) - (
            c_l.sum() / n_t * gini(c_l) + c_r.sum() / n_t * gini(c_r)
        )
        out[node.feature] += (n_t / n_root) * decrease
    return out


def mdi_importance(forest: Forest, dataset: Dataset | None = None) -> np.ndarray:
    """Mean Decrease Impurity, normalized to sum to 1.

    Per tree, each internal node splitting on feature m contributes its
    weighted Gini decrease; per-feature sums are averaged over trees and
    normalized once. Trained forests use the counts recorded while growing;
    imported forests need a dataset so counts can be recomputed from its
    train split. A forest with no splits at all gets an all-zero vector.
    """
    m = forest.n_features
    per_tree = []
    for tree in forest.trees:
        counts = _recorded_counts(tree)
        if counts is None:
            if dataset is None:
                raise SchemaError(
                    "forest lacks training counts; pass the dataset to recompute MDI"
                )
            forest.check_compatible(dataset)
            idx = dataset.train_indices
            if len(idx) == 0:
                raise SchemaError("cannot recompute MDI: train split is empty")
            counts = _replayed_counts(
                tree, dataset.instances[idx], dataset.labels[idx], forest.n_classes
            )
        per_tree.append(_tree_raw_importances(tree, m, counts))
    mean = np.mean(per_tree, axis=0)
    total = mean.sum()
    return mean / total if total > 0 else mean


# ---------------------------------------------------------------------------
# Canonical JSON
# ---------------------------------------------------------------------------


def export_forest(forest: Forest) -> dict:
    """Canonical JSON document; node ids are list positions."""
    trees = []
    for tree in forest.trees:
        nodes = []
        for i, node in enumerate(tree.nodes):
            if isinstance(node, InternalNode):
                nodes.append(
                    {
                        "id": i,
                        "kind": "internal",
                        "feature": node.feature,
                        "threshold": node.threshold,
                        "left": node.left,
                        "right": node.right,
                    }
                )
            else:
                nodes.append(
                    {
                        "id": i,
                        "kind": "leaf",
                        "counts": [int(c) for c in node.class_counts],
                    }
                )
        trees.append({"nodes": nodes, "root": tree.root})
    return {
        "version": FOREST_JSON_VERSION,
        "feature_names": list(forest.feature_names),
        "class_names": list(forest.class_names),
        "trees": trees,
        "train_params": dict(forest.train_params),
    }


def export_forest_text(forest: Forest) -> str:
    return json.dumps(export_forest(forest), indent=2) + "\n"


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ModelJsonError(path, message)


def import_forest(doc: dict, dataset: Dataset | None = None) -> Forest:
    """Validate a canonical JSON document and build a Forest.

    With a dataset, MDI importances are recomputed from its train split
    (imported documents carry no impurity bookkeeping).
    """
    _expect(isinstance(doc, dict), "$", "document must be an object")
    _expect(doc.get("version") == FOREST_JSON_VERSION, "version", f"must be {FOREST_JSON_VERSION}")
    names = doc.get("feature_names")
    _expect(
        isinstance(names, list) and names and all(isinstance(s, str) for s in names),
        "feature_names", "must be a non-empty list of strings",
    )
    classes = doc.get("class_names")
    _expect(
        isinstance(classes, list) and len(classes) >= 2 and all(isinstance(s, str) for s in classes),
        "class_names", "must list at least 2 class names",
    )
    train_params = doc.get("train_params")
    _expect(isinstance(train_params, dict), "train_params", "must be an object")
    raw_trees = doc.get("trees")
    _expect(isinstance(raw_trees, list) and len(raw_trees) >= 1, "trees", "must be a non-empty list")

    m, j = len(names), len(classes)
    trees: list[DecisionTree] = []
    for t, raw in enumerate(raw_trees):
        tpath = f"trees[{t}]"
        _expect(isinstance(raw, dict), tpath, "must be an object")
        raw_nodes = raw.get("nodes")
        _expect(isinstance(raw_nodes, list) and raw_nodes, f"{tpath}.nodes", "must be a non-empty list")
        ids: dict[int, int] = {}
        for i, rn in enumerate(raw_nodes):
            npath = f"{tpath}.nodes[{i}]"
            _expect(isinstance(rn, dict), npath, "must be an object")
            _expect(isinstance(rn.get("id"), int), f"{npath}.id", "must be an integer")
            _expect(rn["id"] not in ids, f"{npath}.id", f"duplicate node id {rn['id']}")
            ids[rn["id"]] = i
        nodes: list[Node] = []
        for i, rn in enumerate(raw_nodes):
            npath = f"{tpath}.nodes[{i}]"
            kind = rn.get("kind")
            if kind == "internal":
                _expect(
                    isinstance(rn.get("feature"), int) and 0 <= rn["feature"] < m,
                    f"{npath}.feature", f"must be an integer in [0, {m})",
                )
                thr = rn.get("threshold")
                _expect(
                    isinstance(thr, (int, float)) and not isinstance(thr, bool) and math.isfinite(thr),
                    f"{npath}.threshold", "must be a finite number",
                )
                for side in ("left", "right"):
                    _expect(isinstance(rn.get(side), int), f"{npath}.{side}", "must be an integer")
                    _expect(rn[side] in ids, f"{npath}.{side}", f"unknown node id {rn[side]}")
                nodes.append(
                    InternalNode(rn["feature"], float(thr), ids[rn["left"]], ids[rn["right"]])
                )
            elif kind == "leaf":
                counts = rn.get("counts")
                _expect(
                    isinstance(counts, list) and len(counts) == j,
                    f"{npath}.counts", f"must be a list of {j} counts",
                )
                _expect(
                    all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in counts),
                    f"{npath}.counts", "must be nonnegative integers",
                )
                _expect(sum(counts) > 0, f"{npath}.counts", "leaf must have a positive count")
                nodes.append(LeafNode(np.array(counts, dtype=np.float64)))
            else:
                raise ModelJsonError(f"{npath}.kind", "must be 'internal' or 'leaf'")
        root = raw.get("root")
        _expect(isinstance(root, int), f"{tpath}.root", "must be an integer")
        _expect(root in ids, f"{tpath}.root", f"unknown node id {root}")
        _check_tree_shape(nodes, ids[root], tpath)
        trees.append(DecisionTree(nodes=nodes, root=ids[root]))

    forest = Forest(
        trees=trees,
        feature_names=list(names),
        class_names=list(classes),
        train_params=dict(train_params),
    )
    if dataset is not None:
        forest.check_compatible(dataset)
        forest.importances = mdi_importance(forest, dataset)
    return forest


def _check_tree_shape(nodes: list[Node], root: int, tpath: str) -> None:
    """Every node reachable exactly once from the root; no cycles, no orphans."""
    seen: set[int] = set()
    stack = [root]
    while stack:
        i = stack.pop()
        _expect(i not in seen, tpath, f"node {i} has multiple parents or a cycle")
        seen.add(i)
        node = nodes[i]
        if isinstance(node, InternalNode):
            _expect(node.left != node.right, tpath, f"node {i} children must differ")
            stack.extend((node.left, node.right))
    _expect(
        len(seen) == len(nodes),
        tpath, f"{len(nodes) - len(seen)} node(s) unreachable from root",
    )


def load_forest_file(path, dataset: Dataset | None = None) -> Forest:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelJsonError("$", f"invalid JSON: {e}") from None
    return import_forest(doc, dataset)


def save_forest_file(forest: Forest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(export_forest_text(forest))
