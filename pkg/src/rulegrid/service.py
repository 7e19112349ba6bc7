"""JSON-over-HTTP service exposing models, rules, explanations and SVG.

Each uploaded or trained model becomes an immutable snapshot (forest,
dataset, rule set) behind an opaque id. Read endpoints are pure functions of
the snapshot and the query, so identical requests return identical bytes
under any concurrency. Bodies are validated by hand: malformed shapes give
400 with the offending field path, instance arity mismatches give 422.
"""

from __future__ import annotations

import json
import shutil
import tempfile
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response

from . import jsonio
from .dataset import Dataset, DatasetSchema, load_dataset
from .errors import (
    DataError,
    EmptyViewError,
    InputError,
    ModelJsonError,
    OrderingError,
    RuleGridError,
)
from .explain import (
    RuleFilter,
    apply_changes,
    global_view,
    local_smallest_changes,
    local_used_rules,
    smallest_changes,
)
from .forest import Forest, TrainParams, accuracy, export_forest, import_forest, predict, train_forest
from .ordering import OrderCriterion, order_columns, order_rows
from .render import RenderStyle, hit_regions, render
from .rules import RuleSet, extract_rules


@dataclass
class Session:
    model_id: str
    forest: Forest
    dataset: Dataset
    ruleset: RuleSet
    schema: dict
    created_at: str


class ApiError(Exception):
    def __init__(self, status: int, message: str, path: str | None = None):
        self.status = status
        self.message = message
        self.path = path
        super().__init__(message)


def _error_response(status: int, message: str, path: str | None = None) -> Response:
    body = {"error": message}
    if path:
        body["path"] = path
    return Response(jsonio.dumps(body), status_code=status, media_type="application/json")


def _json_response(text: str, status: int = 200) -> Response:
    return Response(text, status_code=status, media_type="application/json")


def _field(body: dict, name: str, kind, path: str, required=True, default=None):
    if name not in body:
        if required:
            raise ApiError(400, f"missing field {name!r}", path)
        return default
    value = body[name]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ApiError(400, f"expected {getattr(kind, '__name__', kind)}", path)
    return value


def _parse_instance(body: dict, dataset: Dataset):
    values = _field(body, "instance", list, "instance")
    if len(values) != dataset.n_features:
        raise ApiError(
            422,
            f"instance has {len(values)} values, expected {dataset.n_features}",
            "instance",
        )
    try:
        return dataset.check_instance([float(v) for v in values])
    except (TypeError, ValueError):
        raise ApiError(400, "instance values must be numbers", "instance") from None
    except InputError as e:
        raise ApiError(422, str(e), "instance") from None


def _parse_query_instance(raw: str, dataset: Dataset):
    try:
        values = [float(v) for v in raw.split(",")]
    except ValueError:
        raise ApiError(400, "instance must be comma-separated numbers", "instance") from None
    if len(values) != dataset.n_features:
        raise ApiError(422, f"instance has {len(values)} values, expected {dataset.n_features}", "instance")
    return dataset.check_instance(values)


class ModelStore:
    """In-memory snapshots with optional directory persistence."""

    def __init__(self, data_dir: str | None = None):
        self.sessions: dict[str, Session] = {}
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            for entry in sorted(self.data_dir.iterdir()):
                if (entry / "model.json").exists():
                    self._load_persisted(entry)

    def _load_persisted(self, entry: Path) -> None:
        doc = json.loads((entry / "model.json").read_text())
        schema_doc = json.loads((entry / "schema.json").read_text())
        schema = DatasetSchema(
            label_column=schema_doc["label_column"],
            class_names=schema_doc.get("class_names"),
            train_fraction=schema_doc.get("train_fraction", 0.7),
            split_seed=schema_doc.get("split_seed", 0),
        )
        dataset = load_dataset(entry / "dataset.csv", schema)
        forest = import_forest(doc, dataset)
        self.add(forest, dataset, schema_doc, model_id=entry.name, persist=False)

    def add(self, forest, dataset, schema_doc, model_id=None, persist=True,
            csv_text: str | None = None) -> Session:
        model_id = model_id or uuid.uuid4().hex[:12]
        session = Session(
            model_id=model_id,
            forest=forest,
            dataset=dataset,
            ruleset=extract_rules(forest, dataset),
            schema=schema_doc,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        if persist and self.data_dir and csv_text is not None:
            entry = self.data_dir / model_id
            entry.mkdir(parents=True, exist_ok=True)
            (entry / "model.json").write_text(json.dumps(export_forest(forest), indent=2))
            (entry / "schema.json").write_text(json.dumps(schema_doc))
            (entry / "dataset.csv").write_text(csv_text)
        self.sessions[model_id] = session
        return session

    def get(self, model_id: str) -> Session:
        session = self.sessions.get(model_id)
        if session is None:
            raise ApiError(404, f"unknown model id {model_id!r}")
        return session

    def remove(self, model_id: str) -> None:
        self.get(model_id)
        del self.sessions[model_id]
        if self.data_dir and (self.data_dir / model_id).exists():
            shutil.rmtree(self.data_dir / model_id)


def _summary_json(session: Session) -> dict:
    forest, dataset = session.forest, session.dataset
    test_idx = dataset.test_indices
    return {
        "model_id": session.model_id,
        "summary": {
            "trees": forest.n_trees,
            "rules": len(session.ruleset),
            "accuracy_on_test": accuracy(forest, dataset) if len(test_idx) else None,
            "importances": [float(v) for v in forest.importances],
            "feature_names": list(forest.feature_names),
            "class_names": list(forest.class_names),
            "feature_min": [float(v) for v in dataset.feature_min],
            "feature_max": [float(v) for v in dataset.feature_max],
            "train_min": [float(v) for v in dataset.train_min],
            "train_max": [float(v) for v in dataset.train_max],
            "n_instances": dataset.n_instances,
            "n_test": int(len(test_idx)),
        },
    }


def _ge_view(session: Session, params) -> "ExplanationView":
    def fnum(name):
        raw = params.get(name)
        if raw is None or raw == "":
            return None
        try:
            return float(raw)
        except ValueError:
            raise ApiError(400, f"{name} must be a number", name) from None

    classes = None
    if params.get("classes"):
        try:
            classes = [int(c) for c in params["classes"].split(",")]
        except ValueError:
            raise ApiError(400, "classes must be comma-separated integers", "classes") from None
    rule_ids = None
    if params.get("rule-ids"):
        try:
            rule_ids = [int(r) for r in params["rule-ids"].split(",")]
        except ValueError:
            raise ApiError(400, "rule-ids must be comma-separated integers", "rule-ids") from None
    rule_filter = RuleFilter(
        min_coverage=fnum("min-coverage"),
        min_certainty=fnum("min-certainty"),
        classes=classes,
        explicit_rule_ids=rule_ids,
    )
    view = global_view(session.ruleset, rule_filter)
    return _order_view(view, session, params)


def _order_view(view, session: Session, params):
    if params.get("order-rows"):
        name, _, direction = params["order-rows"].partition(":")
        view = order_rows(
            view, OrderCriterion.from_name("rules", name, direction or None), session.ruleset
        )
    if params.get("order-cols"):
        name, _, direction = params["order-cols"].partition(":")
        view = order_columns(
            view, OrderCriterion.from_name("features", name, direction or None), session.forest
        )
    return view


def create_app(data_dir: str | None = None, cors: bool = False) -> FastAPI:
    app = FastAPI(title="rulegrid", docs_url=None, redoc_url=None)
    store = ModelStore(data_dir)
    app.state.store = store

    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return _error_response(exc.status, exc.message, exc.path)

    @app.exception_handler(RuleGridError)
    async def _domain_error(_request, exc: RuleGridError):
        if isinstance(exc, (EmptyViewError, InputError)):
            return _error_response(422, str(exc))
        if isinstance(exc, (ModelJsonError, DataError, OrderingError)):
            return _error_response(400, str(exc), getattr(exc, "path", None))
        return _error_response(500, str(exc))

    async def _body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "body must be JSON", "$") from None
        if not isinstance(body, dict):
            raise ApiError(400, "body must be a JSON object", "$")
        return body

    @app.post("/models")
    async def create_model(request: Request):
        body = await _body(request)
        csv_text = _field(body, "dataset_csv", str, "dataset_csv")
        schema_doc = _field(body, "schema", dict, "schema")
        label = _field(schema_doc, "label_column", str, "schema.label_column")
        class_names = schema_doc.get("class_names")
        if class_names is not None and (
            not isinstance(class_names, list) or not all(isinstance(c, str) for c in class_names)
        ):
            raise ApiError(400, "must be a list of strings", "schema.class_names")
        schema = DatasetSchema(
            label_column=label,
            class_names=class_names,
            train_fraction=float(schema_doc.get("train_fraction", 0.7)),
            split_seed=int(schema_doc.get("split_seed", 0)),
        )
        with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as fh:
            fh.write(csv_text)
            tmp = fh.name
        try:
            dataset = load_dataset(tmp, schema)
        finally:
            Path(tmp).unlink(missing_ok=True)

        if ("forest" in body) == ("train" in body):
            raise ApiError(400, "provide exactly one of 'forest' or 'train'", "$")
        if "forest" in body:
            doc = _field(body, "forest", dict, "forest")
            forest = import_forest(doc, dataset)
        else:
            train_doc = _field(body, "train", dict, "train")
            params = TrainParams(
                trees=int(train_doc.get("trees", 16)),
                max_depth=train_doc.get("max_depth"),
                features_per_split=train_doc.get("features_per_split"),
                bootstrap=bool(train_doc.get("bootstrap", True)),
                rng_seed=int(train_doc.get("rng_seed", 0)),
            )
            forest = train_forest(dataset, params)
        session = store.add(forest, dataset, schema_doc, csv_text=csv_text)
        return _json_response(jsonio.dumps(_summary_json(session)), status=201)

    @app.get("/models/{model_id}")
    async def get_model(model_id: str):
        session = store.get(model_id)
        return _json_response(jsonio.dumps(_summary_json(session)))

    @app.get("/models/{model_id}/instances")
    async def get_instances(model_id: str, split: str = "test"):
        session = store.get(model_id)
        dataset = session.dataset
        if split not in ("test", "train", "all"):
            raise ApiError(400, "split must be test, train or all", "split")
        if split == "test":
            indices = dataset.test_indices
        elif split == "train":
            indices = dataset.train_indices
        else:
            indices = range(dataset.n_instances)
        rows = []
        for i in indices:
            pred = predict(session.forest, dataset.instances[i])
            rows.append(
                {
                    "index": int(i),
                    "values": [float(v) for v in dataset.instances[i]],
                    "label": int(dataset.labels[i]),
                    "predicted": pred["class"],
                    "probabilities": [float(p) for p in pred["probabilities"]],
                }
            )
        return _json_response(jsonio.dumps({"split": split, "instances": rows}))

    @app.get("/models/{model_id}/rules")
    async def get_rules(model_id: str, request: Request):
        session = store.get(model_id)
        view = _ge_view(session, request.query_params)
        return _json_response(jsonio.view_text(view))

    @app.post("/models/{model_id}/explain/local")
    async def explain_local(model_id: str, request: Request):
        session = store.get(model_id)
        body = await _body(request)
        x = _parse_instance(body, session.dataset)
        view = local_used_rules(session.ruleset, session.forest, x)
        view = _order_view(view, session, body.get("order", {}))
        return _json_response(jsonio.view_text(view))

    @app.post("/models/{model_id}/explain/changes")
    async def explain_changes(model_id: str, request: Request):
        session = store.get(model_id)
        body = await _body(request)
        x = _parse_instance(body, session.dataset)
        view = local_smallest_changes(session.ruleset, session.forest, session.dataset, x)
        view = _order_view(view, session, body.get("order", {}))
        changes = smallest_changes(session.ruleset, session.forest, session.dataset, x)
        return _json_response(jsonio.changes_text(view, changes))

    @app.post("/models/{model_id}/whatif")
    async def whatif(model_id: str, request: Request):
        session = store.get(model_id)
        body = await _body(request)
        x = _parse_instance(body, session.dataset)
        has_tree = "tree_id" in body
        has_edits = "edits" in body
        if has_tree == has_edits:
            raise ApiError(400, "provide exactly one of 'tree_id' or 'edits'", "$")
        if has_tree:
            tree_id = _field(body, "tree_id", int, "tree_id")
            if not 0 <= tree_id < session.forest.n_trees:
                raise ApiError(422, f"tree_id {tree_id} out of range", "tree_id")
            change = smallest_changes(session.ruleset, session.forest, session.dataset, x)[tree_id]
            if change is None:
                raise ApiError(422, f"tree {tree_id} has no opposite-class rule", "tree_id")
            result = apply_changes(x, change, session.ruleset, session.forest, session.dataset)
            return _json_response(jsonio.prediction_text(result))
        edits = _field(body, "edits", list, "edits")
        new_x = [float(v) for v in x]
        for i, edit in enumerate(edits):
            if not isinstance(edit, dict):
                raise ApiError(400, "each edit must be an object", f"edits[{i}]")
            f = _field(edit, "feature", int, f"edits[{i}].feature")
            value = _field(edit, "value", (int, float), f"edits[{i}].value")
            if not 0 <= f < session.dataset.n_features:
                raise ApiError(422, f"feature {f} out of range", f"edits[{i}].feature")
            new_x[f] = float(value)
        result = {
            "new_instance": new_x,
            "old_prediction": _pred_json(predict(session.forest, x)),
            "new_prediction": _pred_json(predict(session.forest, new_x)),
        }
        return _json_response(jsonio.prediction_text(result))

    @app.get("/models/{model_id}/render")
    async def render_view(model_id: str, request: Request):
        session = store.get(model_id)
        params = request.query_params
        kind = params.get("view", "global")
        if kind == "global":
            view = _ge_view(session, params)
        elif kind in ("local", "changes"):
            raw = params.get("instance")
            if not raw:
                raise ApiError(400, "instance query parameter required", "instance")
            x = _parse_query_instance(raw, session.dataset)
            if kind == "local":
                view = local_used_rules(session.ruleset, session.forest, x)
            else:
                view = local_smallest_changes(
                    session.ruleset, session.forest, session.dataset, x
                )
            view = _order_view(view, session, params)
        else:
            raise ApiError(400, "view must be global, local or changes", "view")
        style = RenderStyle()
        svg = render(view, session.dataset, session.forest, style, ruleset=session.ruleset)
        if params.get("regions") in ("1", "true"):
            regions = hit_regions(view, session.dataset, style, ruleset=session.ruleset)
            return _json_response(
                jsonio.dumps({"svg": svg, "regions": regions, "view": view.to_json()})
            )
        return Response(svg, media_type="image/svg+xml")

    @app.delete("/models/{model_id}", status_code=204)
    async def delete_model(model_id: str):
        store.remove(model_id)
        return Response(status_code=204)

    return app


def _pred_json(pred: dict) -> dict:
    return {
        "probabilities": [float(v) for v in pred["probabilities"]],
        "class": pred["class"],
    }


def serve(host: str = "127.0.0.1", port: int = 8000, data_dir: str | None = None,
          cors: bool = False) -> None:
    import uvicorn

    uvicorn.run(create_app(data_dir=data_dir, cors=cors), host=host, port=port)
