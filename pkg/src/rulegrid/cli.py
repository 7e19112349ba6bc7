"""Command-line front end.

Every subcommand is a thin shell over module operations; outputs are the
canonical JSON/JSONL/SVG bytes those operations produce. Exit codes: 0 on
success, 1 for usage errors, 2 for data and file errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import jsonio
from .dataset import Dataset, DatasetSchema, load_dataset
from .errors import RuleGridError
from .explain import (
    ExplanationView,
    RuleFilter,
    apply_changes,
    global_view,
    local_smallest_changes,
    local_used_rules,
    smallest_changes,
)
from .forest import Forest, TrainParams, accuracy, import_forest, save_forest_file, train_forest
from .ordering import OrderCriterion, order_columns, order_rows
from .render import RenderStyle, render
from .rules import extract_rules


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2; usage errors are exit 1
        raise UsageError(f"{self.prog}: {message}")


def _add_data_flags(p, required=False):
    p.add_argument("--data", required=required, help="dataset CSV path")
    p.add_argument("--label", help="label column name (default: recorded in the model)")
    p.add_argument("--class-names", help="comma-separated class order")
    p.add_argument("--train-fraction", type=float, help="train split fraction")
    p.add_argument("--split-seed", type=int, help="train/test split seed")


def _add_order_flags(p):
    p.add_argument("--order-rows", help="rule ordering, e.g. coverage, class-and-coverage[:ascending]")
    p.add_argument("--order-cols", help="feature ordering: importance or dataset-order[:direction]")


def _add_view_output_flags(p):
    p.add_argument("--out", help="write view JSON here instead of stdout")
    p.add_argument("--svg", help="also render the view to this SVG file")


def _add_instance_flags(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--instance", help='feature vector, e.g. "6.9,3.1,4.9,1.5"')
    g.add_argument("--row", type=int, help="dataset row index (CSV order, 0-based)")


def build_parser() -> _Parser:
    parser = _Parser(prog="rulegrid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a forest and write the model JSON")
    _add_data_flags(p, required=True)
    p.add_argument("--trees", type=int, default=16)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--features-per-split", type=int)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model JSON output path")

    p = sub.add_parser("import", help="validate a model JSON and print its summary")
    p.add_argument("--model", required=True)
    _add_data_flags(p)

    p = sub.add_parser("rules", help="extract interval rules to JSON lines")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    p.add_argument("--out", help="rules JSONL output path (default stdout)")

    p = sub.add_parser("explain-global", help="global rules-by-features view")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    p.add_argument("--min-coverage", type=float)
    p.add_argument("--min-certainty", type=float)
    p.add_argument("--classes", help="comma-separated class indices to keep")
    p.add_argument("--rule-ids", help="explicit comma-separated rule ids")
    _add_order_flags(p)
    _add_view_output_flags(p)

    p = sub.add_parser("explain-local", help="used rules for one instance")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    _add_instance_flags(p)
    _add_order_flags(p)
    _add_view_output_flags(p)

    p = sub.add_parser("explain-changes", help="smallest prediction-flipping changes")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    _add_instance_flags(p)
    _add_order_flags(p)
    _add_view_output_flags(p)

    p = sub.add_parser("whatif", help="apply one tree's smallest change and re-predict")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    _add_instance_flags(p)
    p.add_argument("--tree", type=int, required=True)

    p = sub.add_parser("render", help="render a saved view JSON to SVG")
    p.add_argument("--model", required=True)
    _add_data_flags(p, required=True)
    p.add_argument("--view", required=True, help="view JSON path")
    p.add_argument("--svg", required=True, help="SVG output path")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", help="directory for persisted models")
    p.add_argument("--cors", action="store_true", help="allow cross-origin requests")

    return parser


def _schema_from_args(args, model_params: dict | None = None) -> DatasetSchema:
    params = model_params or {}
    label = args.label or params.get("label_column")
    if not label:
        raise UsageError("--label is required (the model records none)")
    class_names = None
    if args.class_names:
        class_names = [c.strip() for c in args.class_names.split(",")]
    elif params.get("class_names"):
        class_names = list(params["class_names"])
    fraction = args.train_fraction
    if fraction is None:
        fraction = params.get("train_fraction", 0.7)
    seed = args.split_seed
    if seed is None:
        seed = params.get("split_seed", 0)
    return DatasetSchema(label, class_names=class_names, train_fraction=fraction, split_seed=seed)


def _load_model_and_data(args) -> tuple[Forest, Dataset]:
    with open(args.model, encoding="utf-8") as fh:
        doc = json.load(fh)
    schema = _schema_from_args(args, doc.get("train_params", {}))
    dataset = load_dataset(args.data, schema)
    return import_forest(doc, dataset), dataset


def _parse_instance(args, dataset: Dataset):
    if args.instance is not None:
        try:
            values = [float(v) for v in args.instance.split(",")]
        except ValueError:
            raise UsageError(f"--instance {args.instance!r} is not a comma-separated vector")
        return dataset.check_instance(values)
    if not 0 <= args.row < dataset.n_instances:
        raise UsageError(f"--row {args.row} out of range [0, {dataset.n_instances})")
    return dataset.instances[args.row]


def _parse_criterion(text: str, target: str) -> OrderCriterion:
    name, _, direction = text.partition(":")
    return OrderCriterion.from_name(target, name.strip(), direction.strip() or None)


def _apply_orderings(view, args, ruleset, forest):
    if getattr(args, "order_rows", None):
        view = order_rows(view, _parse_criterion(args.order_rows, "rules"), ruleset)
    if getattr(args, "order_cols", None):
        view = order_columns(view, _parse_criterion(args.order_cols, "features"), forest)
    return view


def _emit_view(view, args, dataset, forest, ruleset):
    text = jsonio.view_text(view)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render(view, dataset, forest, RenderStyle(), ruleset=ruleset))


def _summary(forest: Forest, dataset: Dataset | None) -> dict:
    out = {
        "trees": forest.n_trees,
        "leaves": forest.total_leaves(),
        "features": forest.n_features,
        "classes": forest.n_classes,
    }
    if forest.importances is not None:
        out["importances"] = [float(v) for v in forest.importances]
    if dataset is not None and len(dataset.test_indices):
        out["accuracy_on_test"] = accuracy(forest, dataset)
    return out


def _run(args) -> int:
    if args.command == "train":
        schema = _schema_from_args(args)
        dataset = load_dataset(args.data, schema)
        params = TrainParams(
            trees=args.trees,
            max_depth=args.max_depth,
            features_per_split=args.features_per_split,
            bootstrap=not args.no_bootstrap,
            rng_seed=args.seed,
        )
        forest = train_forest(dataset, params)
        # record how the dataset was read so downstream commands reproduce it
        forest.train_params.update(
            {
                "label_column": schema.label_column,
                "class_names": list(dataset.class_names),
                "train_fraction": schema.train_fraction,
                "split_seed": schema.split_seed,
            }
        )
        save_forest_file(forest, args.out)
        print(jsonio.dumps({"model": args.out, **_summary(forest, dataset)}))
        return 0

    if args.command == "import":
        with open(args.model, encoding="utf-8") as fh:
            doc = json.load(fh)
        dataset = None
        if args.data:
            dataset = load_dataset(args.data, _schema_from_args(args, doc.get("train_params", {})))
        forest = import_forest(doc, dataset)
        print(jsonio.dumps(_summary(forest, dataset)))
        return 0

    if args.command == "serve":
        from .service import serve

        serve(host=args.host, port=args.port, data_dir=args.data_dir, cors=args.cors)
        return 0

    forest, dataset = _load_model_and_data(args)
    ruleset = extract_rules(forest, dataset)

    if args.command == "rules":
        text = ruleset.export_jsonl()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "explain-global":
        rule_filter = RuleFilter(
            min_coverage=args.min_coverage,
            min_certainty=args.min_certainty,
            classes=[int(c) for c in args.classes.split(",")] if args.classes else None,
            explicit_rule_ids=[int(r) for r in args.rule_ids.split(",")] if args.rule_ids else None,
        )
        view = _apply_orderings(global_view(ruleset, rule_filter), args, ruleset, forest)
        _emit_view(view, args, dataset, forest, ruleset)
        return 0

    if args.command == "explain-local":
        x = _parse_instance(args, dataset)
        view = _apply_orderings(local_used_rules(ruleset, forest, x), args, ruleset, forest)
        _emit_view(view, args, dataset, forest, ruleset)
        return 0

    if args.command == "explain-changes":
        x = _parse_instance(args, dataset)
        view = local_smallest_changes(ruleset, forest, dataset, x)
        view = _apply_orderings(view, args, ruleset, forest)
        changes = smallest_changes(ruleset, forest, dataset, x)
        text = jsonio.changes_text(view, changes)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        if args.svg:
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(render(view, dataset, forest, RenderStyle(), ruleset=ruleset))
        return 0

    if args.command == "whatif":
        x = _parse_instance(args, dataset)
        changes = smallest_changes(ruleset, forest, dataset, x)
        if not 0 <= args.tree < forest.n_trees:
            raise UsageError(f"--tree {args.tree} out of range [0, {forest.n_trees})")
        change = changes[args.tree]
        if change is None:
            raise RuleGridError(f"tree {args.tree} has no opposite-class rule to flip to")
        result = apply_changes(x, change, ruleset, forest, dataset)
        print(jsonio.prediction_text(result))
        return 0

    if args.command == "render":
        with open(args.view, encoding="utf-8") as fh:
            view = ExplanationView.from_json(json.load(fh))
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render(view, dataset, forest, RenderStyle(), ruleset=ruleset))
        return 0

    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        print("run 'rulegrid --help' for usage", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"file not found: {e.filename}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"invalid JSON input: {e}", file=sys.stderr)
        return 2
    except RuleGridError as e:
        print(str(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
