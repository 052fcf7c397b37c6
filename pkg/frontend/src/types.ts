// Shapes of the service's JSON responses. Every number shown in the UI
// comes from one of these payloads; the UI itself never computes
// predictions or importances.

export interface InstanceSummary {
  id: string;
  split: string;
  prediction: number;
  label: number;
  preview: string;
}

export interface InstanceListResponse {
  instances: InstanceSummary[];
  count: number;
}

export interface InstanceDetail extends InstanceSummary {
  kind: "text" | "timeseries" | "toy";
  text?: string;
  tokens?: string[];
  window?: number[][];
  window_size?: number;
  sensors?: number;
  values?: number[];
}

export interface ImportanceEntry {
  feature: string;
  value: number;
  importance: number;
}

export interface CounterfactualEntry {
  feature: string;
  importance: number;
}

export interface SensorSummaryEntry {
  sensor: number;
  mean: number;
  std: number;
  min: number;
  max: number;
}

export interface ExplanationDoc {
  instance_id: string;
  model_prediction: number;
  local_prediction: number;
  fidelity_mae: number | null;
  alpha: number | null;
  seed: number;
  importances: ImportanceEntry[];
  counterfactuals: CounterfactualEntry[];
  explainer?: string;
  sensor_summary?: SensorSummaryEntry[];
}

export type TextEdit = { op: "remove_token" | "add_token"; token: string };
export type SetValueEdit = {
  op: "set_value";
  sensor: number;
  timestep: number;
  value: number;
};
export type AddDeltaEdit = {
  op: "add_delta";
  sensor: number;
  t_start: number;
  t_end: number;
  delta: number;
};
export type Edit = TextEdit | SetValueEdit | AddDeltaEdit;

export interface WhatIfResponse {
  instance_id: string;
  original_prediction: number;
  prediction: number;
  warnings: string[];
  edited_text?: string;
  edited_tokens?: string[];
  edited_window?: number[][];
}

export interface ModelInfo {
  kind: string;
  task: string;
  input_dim: number;
  latent_dim: number;
  widths: number[];
  explainers: string[];
  vocab_size?: number;
  window?: number;
  sensors?: number;
}

export function describeEdit(edit: Edit): string {
  switch (edit.op) {
    case "remove_token":
      return `remove "${edit.token}"`;
    case "add_token":
      return `add "${edit.token}"`;
    case "set_value":
      return `sensor ${edit.sensor} t${edit.timestep} = ${edit.value}`;
    case "add_delta":
      return `sensor ${edit.sensor} t${edit.t_start}..t${edit.t_end} ${
        edit.delta >= 0 ? "+" : ""
      }${edit.delta}`;
  }
}
