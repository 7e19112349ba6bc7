/** Pure HTML builders. Every figure these emit is lifted verbatim from a
 * service response field; the client adds layout, never math. */

import type {
  ChangesPayload,
  CreatedModel,
  ExplanationView,
  InstanceRow,
  ModelSummary,
  RenderPayload,
  RowExtras,
  WhatIfResult,
} from "./types.js";
import type { GeParams } from "./types.js";
import type { ApiError } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export function classColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

function pct(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

function stackedBar(values: number[], title = ""): string {
  const parts = values
    .map((v, j) =>
      v > 0
        ? `<span class="seg" style="width:${(v * 100).toFixed(3)}%;background:${classColor(j)}"></span>`
        : "",
    )
    .join("");
  return `<span class="bar" title="${escapeHtml(title)}">${parts}</span>`;
}

export function navBar(active: string, hasModel: boolean, hasInstance: boolean): string {
  const links: [string, string, boolean][] = [
    ["home", "model", true],
    ["global", "overview", hasModel],
    ["pick", "instances", hasModel],
    ["local", "used rules", hasModel && hasInstance],
    ["changes", "smallest changes", hasModel && hasInstance],
  ];
  const items = links
    .map(([screen, label, enabled]) => {
      const cls = screen === active ? "active" : enabled ? "" : "disabled";
      return `<a class="${cls}" data-action="nav" data-screen="${screen}" href="#/${screen}">${label}</a>`;
    })
    .join("");
  return `<nav>${items}</nav>`;
}

export function homeScreen(created: CreatedModel | null, error?: string): string {
  const form = `
  <section class="card">
    <h2>Load a model</h2>
    <form data-action="create-model">
      <label>dataset CSV <input type="file" name="dataset" required></label>
      <label>label column <input name="label_column" required placeholder="species"></label>
      <label>split seed <input name="split_seed" type="number" value="0"></label>
      <fieldset>
        <legend>source</legend>
        <label><input type="radio" name="mode" value="forest" checked> forest JSON
          <input type="file" name="forest"></label>
        <label><input type="radio" name="mode" value="train"> train here:
          trees <input name="trees" type="number" value="16" class="short">
          max depth <input name="max_depth" type="number" class="short">
          seed <input name="rng_seed" type="number" value="0" class="short"></label>
      </fieldset>
      <button type="submit">create</button>
    </form>
  </section>`;
  const err = error ? `<div class="error">${escapeHtml(error)}</div>` : "";
  return form + err + (created ? summaryPanel(created) : "");
}

export function summaryPanel(created: CreatedModel): string {
  const s = created.summary;
  const acc = s.accuracy_on_test === null ? "n/a" : pct(s.accuracy_on_test);
  const importanceRows = s.feature_names
    .map((name, f) => ({ name, f, importance: s.importances[f] }))
    .sort((a, b) => b.importance - a.importance)
    .map(
      (row) => `
      <li><span class="imp-name">${escapeHtml(row.name)}</span>
        <span class="imp-bar"><span style="width:${(row.importance * 100).toFixed(2)}%"></span></span>
        <span class="imp-value">${row.importance.toFixed(3)}</span></li>`,
    )
    .join("");
  return `
  <section class="card" data-model="${created.model_id}">
    <h2>model <code>${created.model_id}</code></h2>
    <dl class="stats">
      <dt>trees</dt><dd data-stat="trees">${s.trees}</dd>
      <dt>rules</dt><dd data-stat="rules">${s.rules}</dd>
      <dt>test accuracy</dt><dd data-stat="accuracy">${acc}</dd>
      <dt>instances</dt><dd>${s.n_instances} (${s.n_test} test)</dd>
    </dl>
    <h3>feature importance</h3>
    <ul class="importances">${importanceRows}</ul>
  </section>`;
}

function extrasByRule(view: ExplanationView): Map<number, RowExtras> {
  const map = new Map<number, RowExtras>();
  for (const extras of view.row_extras) map.set(extras.rule_id, extras);
  return map;
}

export function matrixFigure(payload: RenderPayload, summary: ModelSummary): string {
  const extras = extrasByRule(payload.view);
  const overlays = payload.regions
    .map((r) => {
      const e = extras.get(r.rule_id);
      const interval =
        r.alpha == null || r.beta == null
          ? "no predicate"
          : `(${r.alpha}, ${r.beta}]`;
      const title =
        `rule ${r.rule_id} · ${summary.feature_names[r.feature]} ${interval}` +
        (e
          ? ` · coverage ${e.coverage} · certainty [${e.certainty.join(", ")}]`
          : "");
      return (
        `<span class="hit" title="${escapeHtml(title)}" data-rule="${r.rule_id}" ` +
        `data-feature="${r.feature}" style="left:${r.x}px;top:${r.y}px;` +
        `width:${r.width}px;height:${r.height}px"></span>`
      );
    })
    .join("");
  return `<figure class="matrix">${payload.svg}<div class="hits">${overlays}</div></figure>`;
}

export function geControls(params: GeParams): string {
  const rowKeys = ["extraction-order", "coverage", "certainty", "class-and-coverage", "class-and-certainty"];
  const colKeys = ["importance", "dataset-order"];
  const options = (keys: string[], selected?: string) =>
    ['<option value="">default</option>']
      .concat(
        keys.map(
          (k) => `<option value="${k}"${k === selected ? " selected" : ""}>${k}</option>`,
        ),
      )
      .join("");
  return `
  <form class="controls" data-action="ge-params">
    <label>order rows <select name="order-rows">${options(rowKeys, params["order-rows"])}</select></label>
    <label>order columns <select name="order-cols">${options(colKeys, params["order-cols"])}</select></label>
    <label>min coverage <input name="min-coverage" type="number" min="0" max="1" step="0.05"
      value="${params["min-coverage"] ?? ""}"></label>
    <label>min certainty <input name="min-certainty" type="number" min="0" max="1" step="0.05"
      value="${params["min-certainty"] ?? ""}"></label>
    <button type="submit">apply</button>
  </form>`;
}

export function globalScreen(payload: RenderPayload, params: GeParams, summary: ModelSummary): string {
  return `
  <section class="card">
    <h2>model overview</h2>
    ${geControls(params)}
    <p class="hint">${payload.view.rule_rows.length} rules × ${payload.view.feature_cols.length} features</p>
    ${matrixFigure(payload, summary)}
  </section>`;
}

export function pickScreen(rows: InstanceRow[], summary: ModelSummary): string {
  const header = summary.feature_names.map((n) => `<th>${escapeHtml(n)}</th>`).join("");
  const body = rows
    .map((row) => {
      const wrong = row.label !== row.predicted ? " misclassified" : "";
      const cells = row.values.map((v) => `<td>${v}</td>`).join("");
      return `<tr class="instance-row${wrong}">
        <td>${row.index}</td>${cells}
        <td>${escapeHtml(summary.class_names[row.label])}</td>
        <td>${escapeHtml(summary.class_names[row.predicted])}</td>
        <td>${stackedBar(row.probabilities, row.probabilities.join(", "))}</td>
        <td><button data-action="pick-row" data-index="${row.index}"
          data-values="${row.values.join(",")}">audit</button></td>
      </tr>`;
    })
    .join("");
  return `
  <section class="card">
    <h2>test instances</h2>
    <form class="controls" data-action="manual-instance">
      <label>manual vector <input name="vector" placeholder="6.9,3.1,4.9,1.5" size="40"></label>
      <button type="submit">audit</button>
    </form>
    <table class="instances">
      <thead><tr><th>#</th>${header}<th>label</th><th>predicted</th><th>probabilities</th><th></th></tr></thead>
      <tbody>${body}</tbody>
    </table>
  </section>`;
}

export function localScreen(
  view: ExplanationView,
  payload: RenderPayload,
  summary: ModelSummary,
  whatif: WhatIfResult | null,
): string {
  const rows = view.row_extras
    .map((e, i) => {
      const vote = e.cumulative_vote ?? [];
      const fixed = view.decision_fixed_row !== null && i + 1 === view.decision_fixed_row;
      return `<tr class="${fixed ? "decision-fixed" : ""}" data-vote='${JSON.stringify(vote)}'>
        <td>r${e.rule_id}</td><td>${e.tree_id}</td>
        <td>${e.coverage}</td>
        <td>${stackedBar(e.certainty, e.certainty.join(", "))}</td>
        <td>${stackedBar(vote, vote.join(", "))}</td>
        <td><code class="vote-values">[${vote.join(", ")}]</code></td>
      </tr>`;
    })
    .join("");
  const finalVote = view.row_extras[view.row_extras.length - 1]?.cumulative_vote ?? [];
  const committee = `<p class="committee">committee vote:
    <code class="vote-json">${JSON.stringify(finalVote)}</code>
    ${stackedBar(finalVote, finalVote.join(", "))}</p>`;
  return `
  <section class="card">
    <h2>rules used for <code>[${(view.instance ?? []).join(", ")}]</code></h2>
    ${matrixFigure(payload, summary)}
    <table class="votes">
      <thead><tr><th>rule</th><th>tree</th><th>coverage</th><th>certainty</th>
        <th>cumulative vote</th><th>values</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    ${committee}
    ${slidersPanel(summary, view.instance ?? [])}
    ${whatif ? whatifPanel(whatif, summary) : ""}
  </section>`;
}

export function changesScreen(
  payload: ChangesPayload,
  rendered: RenderPayload,
  summary: ModelSummary,
  whatif: WhatIfResult | null,
): string {
  const vectors = payload.view.change_vectors ?? [];
  const rows = vectors
    .map((cv) => {
      const edits = cv.deltas
        .map((d, f) => ({ d, f }))
        .filter(({ d }) => d !== 0)
        .map(
          ({ d, f }) =>
            `<span class="delta ${d > 0 ? "up" : "down"}">${escapeHtml(
              summary.feature_names[f],
            )} ${d > 0 ? "↑" : "↓"} ${d}</span>`,
        )
        .join(" ");
      return `<tr data-change-sum="${cv.change_sum}">
        <td>r${cv.target_rule_id}</td><td>${cv.tree_id}</td>
        <td>${escapeHtml(summary.class_names[cv.from_class])} →
            ${escapeHtml(summary.class_names[cv.to_class])}</td>
        <td><code>${cv.change_sum}</code></td>
        <td>${edits || "—"}</td>
        <td><button data-action="apply-change" data-tree="${cv.tree_id}">apply</button></td>
      </tr>`;
    })
    .join("");
  return `
  <section class="card">
    <h2>smallest changes for <code>[${(payload.view.instance ?? []).join(", ")}]</code></h2>
    ${matrixFigure(rendered, summary)}
    <table class="changes">
      <thead><tr><th>to rule</th><th>tree</th><th>class swap</th><th>change sum</th>
        <th>feature changes</th><th></th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    ${whatif ? whatifPanel(whatif, summary) : ""}
  </section>`;
}

export function slidersPanel(summary: ModelSummary, instance: number[]): string {
  const sliders = summary.feature_names
    .map((name, f) => {
      const lo = summary.train_min[f];
      const hi = summary.train_max[f];
      const step = (hi - lo) / 200 || 1;
      return `<label class="slider">
        <span>${escapeHtml(name)}</span>
        <input type="range" data-action="edit-feature" data-feature="${f}"
          min="${lo}" max="${hi}" step="${step}" value="${instance[f]}">
        <output>${instance[f]}</output>
      </label>`;
    })
    .join("");
  return `<details class="card sliders"><summary>what-if sliders (train ranges)</summary>
    ${sliders}
    <button data-action="run-edits">re-predict</button>
  </details>`;
}

export function whatifPanel(result: WhatIfResult, summary: ModelSummary): string {
  const line = (label: string, pred: { probabilities: number[]; class: number }) =>
    `<div class="pred"><span>${label}</span>
      ${stackedBar(pred.probabilities, pred.probabilities.join(", "))}
      <strong>${escapeHtml(summary.class_names[pred.class])}</strong>
      <code class="pred-json">${JSON.stringify(pred.probabilities)}</code></div>`;
  return `
  <section class="whatif" data-new-instance="${result.new_instance.join(",")}">
    <h3>what-if</h3>
    ${line("current", result.old_prediction)}
    ${line("edited", result.new_prediction)}
    <p>edited instance: <code>[${result.new_instance.join(", ")}]</code>
      <button data-action="adopt">adopt as working instance</button></p>
  </section>`;
}

export function errorBox(err: ApiError | Error): string {
  const path = (err as ApiError).path;
  return `<div class="error">${escapeHtml(err.message)}${
    path ? ` <code>(${escapeHtml(path)})</code>` : ""
  }</div>`;
}

export function loading(): string {
  return `<div class="loading">loading…</div>`;
}
