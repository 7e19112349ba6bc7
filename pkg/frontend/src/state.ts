import type { FeatureEdit, GeParams, WhatIfResult } from "./types.js";

export type Screen = "home" | "global" | "pick" | "local" | "changes";

/** Everything that determines what is on screen. View-determining parts
 * round-trip through the URL hash so views are shareable deep links. */
export interface UiState {
  modelId: string | null;
  screen: Screen;
  geParams: GeParams;
  /** The working instance being audited; replaced only by explicit adopt. */
  instance: number[] | null;
  instanceRow: number | null;
  /** Slider edits not yet adopted; always rendered against the latest
   * what-if response. */
  pendingEdits: FeatureEdit[];
  lastWhatIf: WhatIfResult | null;
}

export function initialState(): UiState {
  return {
    modelId: null,
    screen: "home",
    geParams: {},
    instance: null,
    instanceRow: null,
    pendingEdits: [],
    lastWhatIf: null,
  };
}

const GE_KEYS: (keyof GeParams)[] = [
  "min-coverage",
  "min-certainty",
  "classes",
  "order-rows",
  "order-cols",
];

export function encodeHash(state: UiState): string {
  const params = new URLSearchParams();
  if (state.modelId) params.set("model", state.modelId);
  for (const key of GE_KEYS) {
    const value = state.geParams[key];
    if (value) params.set(key, value);
  }
  if (state.instance) params.set("instance", state.instance.join(","));
  if (state.instanceRow !== null) params.set("row", String(state.instanceRow));
  const qs = params.toString();
  return `#/${state.screen}${qs ? "?" + qs : ""}`;
}

export function decodeHash(hash: string): UiState {
  const state = initialState();
  const match = /^#\/([a-z]+)(?:\?(.*))?$/.exec(hash);
  if (!match) return state;
  const [, screen, qs] = match;
  if (["home", "global", "pick", "local", "changes"].includes(screen)) {
    state.screen = screen as Screen;
  }
  const params = new URLSearchParams(qs ?? "");
  state.modelId = params.get("model");
  for (const key of GE_KEYS) {
    const value = params.get(key);
    if (value) state.geParams[key] = value;
  }
  const instance = params.get("instance");
  if (instance) state.instance = instance.split(",").map(Number);
  const row = params.get("row");
  if (row !== null) state.instanceRow = Number(row);
  return state;
}

type Pending = { key: string; seq: number; promise: Promise<unknown> };

/** Stale-response control: one scope per screen. Identical in-flight
 * requests are de-duplicated; when a newer request supersedes an older one,
 * the older resolution comes back as null and must be dropped. */
export class SequenceGate {
  private seqs = new Map<string, number>();
  private pending = new Map<string, Pending>();

  async run<T>(scope: string, key: string, task: () => Promise<T>): Promise<T | null> {
    const inflight = this.pending.get(scope);
    if (inflight && inflight.key === key) {
      return inflight.promise as Promise<T | null>;
    }
    const seq = (this.seqs.get(scope) ?? 0) + 1;
    this.seqs.set(scope, seq);
    const promise = (async () => {
      try {
        const result = await task();
        return this.seqs.get(scope) === seq ? result : null;
      } finally {
        const current = this.pending.get(scope);
        if (current && current.seq === seq) this.pending.delete(scope);
      }
    })();
    this.pending.set(scope, { key, seq, promise });
    return promise;
  }
}
