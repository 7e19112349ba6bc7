/** Wire types mirroring the rulegrid service JSON. The client never derives
 * these numbers itself; everything rendered comes off one of these shapes. */

export interface ModelSummary {
  trees: number;
  rules: number;
  accuracy_on_test: number | null;
  importances: number[];
  feature_names: string[];
  class_names: string[];
  feature_min: number[];
  feature_max: number[];
  train_min: number[];
  train_max: number[];
  n_instances: number;
  n_test: number;
}

export interface CreatedModel {
  model_id: string;
  summary: ModelSummary;
}

export interface RowExtras {
  rule_id: number;
  tree_id: number;
  coverage: number;
  certainty: number[];
  class_index: number;
  cumulative_vote?: number[];
  change_sum?: number;
  original_class?: number;
}

export interface ChangeVector {
  target_rule_id: number;
  tree_id: number;
  deltas: number[];
  change_sum: number;
  from_class: number;
  to_class: number;
}

export type ViewKind = "GE" | "LE_UR" | "LE_SC";

export interface ExplanationView {
  kind: ViewKind;
  rule_rows: number[];
  feature_cols: number[];
  row_extras: RowExtras[];
  header: number[];
  instance: number[] | null;
  decision_fixed_row: number | null;
  change_vectors?: ChangeVector[];
}

export interface Prediction {
  probabilities: number[];
  class: number;
}

export interface WhatIfResult {
  new_instance: number[];
  old_prediction: Prediction;
  new_prediction: Prediction;
}

export interface ChangesPayload {
  view: ExplanationView;
  changes: (ChangeVector | null)[];
}

export interface InstanceRow {
  index: number;
  values: number[];
  label: number;
  predicted: number;
  probabilities: number[];
}

export interface InstancesPayload {
  split: string;
  instances: InstanceRow[];
}

export interface HitRegion {
  rule_id: number;
  feature: number;
  x: number;
  y: number;
  width: number;
  height: number;
  alpha?: number | null;
  beta?: number | null;
}

export interface RenderPayload {
  svg: string;
  regions: HitRegion[];
  view: ExplanationView;
}

/** Query parameters of the global view, kebab-case as the service takes them. */
export interface GeParams {
  "min-coverage"?: string;
  "min-certainty"?: string;
  classes?: string;
  "order-rows"?: string;
  "order-cols"?: string;
}

export interface FeatureEdit {
  feature: number;
  value: number;
}
