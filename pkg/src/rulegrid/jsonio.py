"""Canonical JSON text for views, changes and predictions.

The CLI and the HTTP service both emit exactly these bytes, so their outputs
are comparable and deterministic.
"""

from __future__ import annotations

import json

from .explain import ChangeVector, ExplanationView


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def view_text(view: ExplanationView) -> str:
    return dumps(view.to_json())


def changes_text(view: ExplanationView, changes: list[ChangeVector | None]) -> str:
    return dumps(
        {
            "view": view.to_json(),
            "changes": [cv.to_json() if cv is not None else None for cv in changes],
        }
    )


def prediction_text(result: dict) -> str:
    return dumps(result)
