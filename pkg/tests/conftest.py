import json
from pathlib import Path

import numpy as np
import pytest

from rulegrid import (
    Dataset,
    DatasetSchema,
    TrainParams,
    extract_rules,
    import_forest,
    load_dataset,
    train_forest,
)

DATA_DIR = Path(__file__).parent / "data"

# Split seed chosen so the 70% train split holds 35 versicolor instances, 10
# of which fall in the (6.15, 7.9] x (0.75, 1.75] sepal-length/petal-width box
# of the hand-encoded forest's third rule.
IRIS_SPLIT_SEED = 43

# The instance audited throughout the local-explanation examples.
X13 = [6.9, 3.1, 4.9, 1.5]


@pytest.fixture(scope="session")
def iris():
    return load_dataset(
        DATA_DIR / "iris.csv",
        DatasetSchema(label_column="species", train_fraction=0.7, split_seed=IRIS_SPLIT_SEED),
    )


@pytest.fixture(scope="session")
def wdbc():
    return load_dataset(
        DATA_DIR / "wdbc.csv",
        DatasetSchema(label_column="diagnosis", train_fraction=0.7, split_seed=0),
    )


@pytest.fixture(scope="session")
def hand_forest(iris):
    with open(DATA_DIR / "iris_forest.json") as fh:
        return import_forest(json.load(fh), iris)


@pytest.fixture(scope="session")
def hand_rules(hand_forest, iris):
    return extract_rules(hand_forest, iris)


@pytest.fixture(scope="session")
def iris_k3(iris):
    """A trained 3-tree depth-3 forest over all four features."""
    return train_forest(
        iris, TrainParams(trees=3, max_depth=3, features_per_split=4, rng_seed=7)
    )


def synthetic_dataset(seed: int, n: int = 240, m: int = 5, j: int = 3,
                      train_fraction: float = 0.7) -> Dataset:
    """Gaussian blobs with label noise; deterministic in the seed."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-3, 3, size=(j, m))
    labels = rng.integers(0, j, size=n)
    X = centers[labels] + rng.normal(0, 1.2, size=(n, m))
    flip = rng.random(n) < 0.08
    labels[flip] = rng.integers(0, j, size=flip.sum())
    n_train = int(round(train_fraction * n))
    mask = np.zeros(n, dtype=bool)
    mask[rng.permutation(n)[:n_train]] = True
    return Dataset(
        feature_names=[f"f{i}" for i in range(m)],
        class_names=[f"c{i}" for i in range(j)],
        instances=X,
        labels=labels,
        train_mask=mask,
    )


def sample_in_box(dataset: Dataset, count: int, seed: int) -> np.ndarray:
    """Uniform instances inside the dataset's bounding box."""
    rng = np.random.default_rng(seed)
    return rng.uniform(dataset.feature_min, dataset.feature_max,
                       size=(count, dataset.n_features))
