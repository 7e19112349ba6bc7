import { ApiClient } from "./api.js";
import { App, type AppHost } from "./app.js";
import { decodeHash } from "./state.js";
import type { FeatureEdit } from "./types.js";

const root = document.getElementById("root") as HTMLElement;
const apiBase =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000";

let suppressHashEvent = false;
const host: AppHost = {
  render(html) {
    root.innerHTML = html;
  },
  setHash(hash) {
    if (location.hash !== hash) {
      suppressHashEvent = true;
      location.hash = hash;
    }
  },
};

const app = App.fromHash(new ApiClient(apiBase), host, location.hash);
void app.boot();

window.addEventListener("hashchange", () => {
  if (suppressHashEvent) {
    suppressHashEvent = false;
    return;
  }
  app.state = decodeHash(location.hash);
  void app.boot();
});

function parseVector(text: string): number[] | null {
  const values = text.split(",").map((v) => Number(v.trim()));
  return values.length && values.every((v) => Number.isFinite(v)) ? values : null;
}

root.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target || target.tagName === "FORM") return;
  const action = target.dataset.action;
  if (action === "nav") {
    event.preventDefault();
    const screen = target.dataset.screen as Parameters<App["goto"]>[0];
    void app.goto(screen);
  } else if (action === "pick-row") {
    const values = parseVector(target.dataset.values ?? "");
    if (values) void app.pickRow(Number(target.dataset.index), values);
  } else if (action === "apply-change") {
    void app.applyChange(Number(target.dataset.tree));
  } else if (action === "adopt") {
    void app.adopt();
  } else if (action === "run-edits") {
    const edits: FeatureEdit[] = [];
    root.querySelectorAll<HTMLInputElement>('input[data-action="edit-feature"]').forEach(
      (input) => {
        edits.push({ feature: Number(input.dataset.feature), value: Number(input.value) });
      },
    );
    void app.applyEdits(edits);
  }
});

root.addEventListener("input", (event) => {
  const input = event.target as HTMLInputElement;
  if (input.dataset.action === "edit-feature") {
    const output = input.parentElement?.querySelector("output");
    if (output) output.textContent = input.value;
  }
});

root.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) return;
  event.preventDefault();
  if (action === "ge-params") {
    const data = new FormData(form);
    void app.openGlobal({
      "order-rows": (data.get("order-rows") as string) || undefined,
      "order-cols": (data.get("order-cols") as string) || undefined,
      "min-coverage": (data.get("min-coverage") as string) || undefined,
      "min-certainty": (data.get("min-certainty") as string) || undefined,
    });
  } else if (action === "manual-instance") {
    const values = parseVector((new FormData(form).get("vector") as string) ?? "");
    if (values) void app.setManualInstance(values);
  } else if (action === "create-model") {
    void submitCreateModel(form);
  }
});

async function submitCreateModel(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const datasetFile = data.get("dataset") as File;
  const body: Record<string, unknown> = {
    dataset_csv: await datasetFile.text(),
    schema: {
      label_column: data.get("label_column"),
      split_seed: Number(data.get("split_seed") ?? 0),
    },
  };
  if (data.get("mode") === "train") {
    const maxDepth = data.get("max_depth") as string;
    body.train = {
      trees: Number(data.get("trees") ?? 16),
      max_depth: maxDepth ? Number(maxDepth) : null,
      rng_seed: Number(data.get("rng_seed") ?? 0),
    };
  } else {
    const forestFile = data.get("forest") as File;
    body.forest = JSON.parse(await forestFile.text());
  }
  await app.createModel(body as Parameters<App["createModel"]>[0]);
}
