"""Record real service responses as frontend contract-test fixtures.

Regenerate after wire-format changes: python3 scripts/record_fixtures.py
"""
import json
from pathlib import Path

from fastapi.testclient import TestClient

from rulegrid.service import create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend/tests/fixtures"
DATA = ROOT / "tests/data"
X13 = [6.9, 3.1, 4.9, 1.5]


def save(name: str, payload) -> None:
    (OUT / name).write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {name}")


app = create_app()
with TestClient(app) as client:
    body = {
        "forest": json.loads((DATA / "iris_forest.json").read_text()),
        "dataset_csv": (DATA / "iris.csv").read_text(),
        "schema": {"label_column": "species", "train_fraction": 0.7, "split_seed": 43},
    }
    created = client.post("/models", json=body).json()
    model_id = created["model_id"]
    save("summary.json", created)
    save("instances_test.json", client.get(f"/models/{model_id}/instances?split=test").json())
    save("rules_default.json", client.get(f"/models/{model_id}/rules").json())
    save(
        "render_global.json",
        client.get(f"/models/{model_id}/render?view=global&regions=true").json(),
    )
    save(
        "render_global_ordered.json",
        client.get(
            f"/models/{model_id}/render?view=global&regions=true&order-rows=class-and-coverage"
        ).json(),
    )
    save(
        "local_x13.json",
        client.post(f"/models/{model_id}/explain/local", json={"instance": X13}).json(),
    )
    save(
        "render_local_x13.json",
        client.get(
            f"/models/{model_id}/render?view=local&regions=true&instance=6.9,3.1,4.9,1.5"
        ).json(),
    )
    save(
        "changes_x13.json",
        client.post(f"/models/{model_id}/explain/changes", json={"instance": X13}).json(),
    )
    save(
        "render_changes_x13.json",
        client.get(
            f"/models/{model_id}/render?view=changes&regions=true&instance=6.9,3.1,4.9,1.5"
        ).json(),
    )
    save(
        "whatif_tree1.json",
        client.post(f"/models/{model_id}/whatif", json={"instance": X13, "tree_id": 1}).json(),
    )
    save(
        "whatif_edit.json",
        client.post(
            f"/models/{model_id}/whatif",
            json={"instance": X13, "edits": [{"feature": 3, "value": 2.0}]},
        ).json(),
    )
