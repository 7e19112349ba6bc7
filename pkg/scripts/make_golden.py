"""Regenerate the frozen SVG used by the renderer byte-identity test.

Run after deliberate renderer changes, re-inspect the output, then commit.
"""
import json
from pathlib import Path

from rulegrid import DatasetSchema, extract_rules, global_view, import_forest, load_dataset, render

ROOT = Path(__file__).resolve().parent.parent / "tests"

iris = load_dataset(ROOT / "data/iris.csv", DatasetSchema("species", train_fraction=0.7, split_seed=43))
forest = import_forest(json.loads((ROOT / "data/iris_forest.json").read_text()), iris)
ruleset = extract_rules(forest, iris)
svg = render(global_view(ruleset), iris, forest, ruleset=ruleset)
out = ROOT / "golden/iris_global.svg"
out.write_text(svg)
print(f"wrote {out} ({len(svg)} bytes)")
