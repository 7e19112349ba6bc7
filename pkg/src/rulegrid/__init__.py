"""rulegrid: random-forest decision paths as disjoint interval rules,
explained through matrix views (global overview, used rules, smallest
changes) with deterministic SVG rendering, a CLI and an HTTP service."""

from .dataset import Dataset, DatasetSchema, load_dataset, save_dataset_csv
from .errors import (
    DataError,
    EmptyViewError,
    InputError,
    InvariantError,
    ModelJsonError,
    OrderingError,
    ParseError,
    RenderError,
    RuleGridError,
    SchemaError,
    StaleChangeError,
)
from .explain import (
    GE,
    LE_SC,
    LE_UR,
    ChangeVector,
    ExplanationView,
    RuleFilter,
    apply_changes,
    global_view,
    local_smallest_changes,
    local_used_rules,
    smallest_changes,
)
from .forest import (
    DecisionTree,
    Forest,
    InternalNode,
    LeafNode,
    TrainParams,
    accuracy,
    export_forest,
    export_forest_text,
    import_forest,
    load_forest_file,
    mdi_importance,
    predict,
    save_forest_file,
    train_forest,
)
from .ordering import OrderCriterion, order_columns, order_rows
from .render import RenderStyle, hit_regions, render
from .rules import Interval, RuleSet, VectorRule, extract_rules, rule_matches, used_rule, used_rules

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DatasetSchema", "load_dataset", "save_dataset_csv",
    "RuleGridError", "DataError", "ParseError", "SchemaError", "InputError",
    "ModelJsonError", "EmptyViewError", "OrderingError", "InvariantError",
    "StaleChangeError", "RenderError",
    "DecisionTree", "Forest", "InternalNode", "LeafNode", "TrainParams",
    "train_forest", "predict", "accuracy", "mdi_importance",
    "import_forest", "export_forest", "export_forest_text",
    "load_forest_file", "save_forest_file",
    "Interval", "VectorRule", "RuleSet", "extract_rules", "rule_matches",
    "used_rule", "used_rules",
    "GE", "LE_UR", "LE_SC", "RuleFilter", "ExplanationView", "ChangeVector",
    "global_view", "local_used_rules", "smallest_changes",
    "local_smallest_changes", "apply_changes",
    "OrderCriterion", "order_rows", "order_columns",
    "RenderStyle", "render", "hit_regions",
    "__version__",
]
