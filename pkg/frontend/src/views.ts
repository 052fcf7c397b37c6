import { barChart } from "./charts";
import type { Session, SessionSnapshot } from "./state";
import type { ExplanationDoc, InstanceDetail, InstanceSummary } from "./types";
import { describeEdit } from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const fmt = (p: number) => `${(p * 100).toFixed(2)}%`;

// ---------------------------------------------------------------- browser

export function renderInstanceList(
  instances: InstanceSummary[],
  onSelect: (id: string) => void,
): HTMLElement {
  const root = el("div", "instance-list");
  if (instances.length === 0) {
    root.appendChild(el("p", "empty-note", "No instances in this workspace."));
    return root;
  }
  const table = el("table");
  const head = el("tr");
  for (const h of ["id", "prediction", "label", "preview"]) {
    head.appendChild(el("th", undefined, h));
  }
  table.appendChild(head);
  for (const inst of instances) {
    const row = el("tr", "instance-row");
    row.dataset.id = inst.id;
    const link = el("a", "instance-link", inst.id);
    link.href = `#/instance/${inst.id}`;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      onSelect(inst.id);
    });
    const idCell = el("td");
    idCell.appendChild(link);
    row.appendChild(idCell);
    row.appendChild(el("td", undefined, fmt(inst.prediction)));
    row.appendChild(el("td", undefined, String(inst.label)));
    row.appendChild(el("td", "preview", inst.preview));
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}

// ----------------------------------------------------------- explanation

function schemaError(payload: unknown, problem: string): HTMLElement {
  const panel = el("div", "error-panel");
  panel.appendChild(el("h3", undefined, "Unexpected explanation payload"));
  panel.appendChild(el("p", undefined, problem));
  const raw = el("pre", "raw-payload");
  raw.textContent = JSON.stringify(payload, null, 2);
  panel.appendChild(raw);
  return panel;
}

function validExplanation(doc: unknown): doc is ExplanationDoc {
  if (typeof doc !== "object" || doc === null) return false;
  const d = doc as Record<string, unknown>;
  return (
    typeof d.model_prediction === "number" &&
    typeof d.local_prediction === "number" &&
    Array.isArray(d.importances) &&
    Array.isArray(d.counterfactuals) &&
    (d.importances as unknown[]).every(
      (e) =>
        typeof e === "object" &&
        e !== null &&
        typeof (e as Record<string, unknown>).feature === "string" &&
        typeof (e as Record<string, unknown>).importance === "number",
    )
  );
}

export interface ExplanationCallbacks {
  onAddCounterfactual?: (token: string) => void;
}

export function renderExplanation(
  doc: unknown,
  detail: InstanceDetail | null,
  currentWindow: number[][],
  callbacks: ExplanationCallbacks = {},
  drilldownSensor = 0,
): HTMLElement {
  if (!validExplanation(doc)) {
    return schemaError(doc, "missing or mistyped explanation fields");
  }
  const root = el("div", "explanation-view");
  const header = el("div", "explanation-header");
  header.appendChild(
    el("span", "model-pred", `model: ${fmt(doc.model_prediction)}`),
  );
  header.appendChild(
    el("span", "local-pred", `surrogate: ${fmt(doc.local_prediction)}`),
  );
  if (doc.fidelity_mae !== null && doc.fidelity_mae !== undefined) {
    header.appendChild(
      el("span", "fidelity", `fidelity mae: ${doc.fidelity_mae.toExponential(2)}`),
    );
  }
  root.appendChild(header);

  if (doc.sensor_summary && detail?.kind === "timeseries") {
    root.appendChild(renderSensorSection(doc, currentWindow, drilldownSensor));
    return root;
  }

  const presentTitle =
    detail?.kind === "text" ? "Words in the sentence" : "Feature importances";
  const present = doc.importances.filter((e) => e.value !== 0);
  const presentPanel = el("div", "panel present-panel");
  presentPanel.appendChild(el("h3", undefined, presentTitle));
  presentPanel.appendChild(
    barChart(present.map((e) => ({ label: e.feature, value: e.importance }))),
  );
  root.appendChild(presentPanel);

  if (detail?.kind === "text") {
    const cfPanel = el("div", "panel counterfactual-panel");
    cfPanel.appendChild(el("h3", undefined, "Words not in the sentence"));
    const candidates = doc.counterfactuals.filter(
      (c) => Math.abs(c.importance) > 1e-12,
    );
    if (candidates.length === 0) {
      cfPanel.appendChild(el("p", "empty-note", "none"));
    } else {
      cfPanel.appendChild(
        barChart(candidates.map((c) => ({ label: c.feature, value: c.importance }))),
      );
      const hint = el("div", "cf-buttons");
      for (const c of candidates.slice(0, 10)) {
        const btn = el(
          "button",
          "cf-add",
          `${c.importance >= 0 ? "+" : "-"} ${c.feature}`,
        );
        btn.dataset.token = c.feature;
        btn.addEventListener("click", () =>
          callbacks.onAddCounterfactual?.(c.feature),
        );
        hint.appendChild(btn);
      }
      cfPanel.appendChild(hint);
    }
    root.appendChild(cfPanel);
  }
  return root;
}

function renderSensorSection(
  doc: ExplanationDoc,
  window: number[][],
  sensor: number,
): HTMLElement {
  const section = el("div", "sensor-section");
  const summary = doc.sensor_summary!;
  const meanPanel = el("div", "panel sensor-summary");
  meanPanel.appendChild(el("h3", undefined, "Mean influence per sensor"));
  meanPanel.appendChild(
    barChart(summary.map((s) => ({ label: `sensor ${s.sensor}`, value: s.mean }))),
  );
  const table = el("table", "sensor-table");
  const head = el("tr");
  for (const h of ["sensor", "mean", "std", "min", "max"]) {
    head.appendChild(el("th", undefined, h));
  }
  table.appendChild(head);
  for (const s of summary) {
    const row = el("tr");
    row.appendChild(el("td", undefined, String(s.sensor)));
    for (const v of [s.mean, s.std, s.min, s.max]) {
      row.appendChild(el("td", undefined, v.toExponential(2)));
    }
    table.appendChild(row);
  }
  meanPanel.appendChild(table);
  section.appendChild(meanPanel);

  const sensors = summary.length;
  const drill = el("div", "panel sensor-drilldown");
  drill.appendChild(el("h3", undefined, `Sensor ${sensor} per time step`));
  const dtable = el("table", "drill-table");
  const dhead = el("tr");
  for (const h of ["t", "influence", "value", "influence x value"]) {
    dhead.appendChild(el("th", undefined, h));
  }
  dtable.appendChild(dhead);
  const steps = window.length;
  for (let t = 0; t < steps; t++) {
    const influence = doc.importances[t * sensors + sensor]?.importance ?? 0;
    const value = window[t]?.[sensor] ?? 0;
    const row = el("tr", "drill-row");
    row.appendChild(el("td", undefined, String(t)));
    row.appendChild(el("td", undefined, influence.toExponential(2)));
    row.appendChild(el("td", undefined, value.toFixed(4)));
    row.appendChild(el("td", undefined, (influence * value).toExponential(2)));
    dtable.appendChild(row);
  }
  drill.appendChild(dtable);
  section.appendChild(drill);
  return section;
}

// ----------------------------------------------------------------- editor

export function renderEditor(session: Session, snap: SessionSnapshot): HTMLElement {
  const root = el("div", "editor-view");
  const pred = el("div", "prediction-line");
  if (snap.originalPrediction !== null && snap.prediction !== null) {
    const delta = snap.prediction - snap.originalPrediction;
    pred.appendChild(el("span", undefined, `original ${fmt(snap.originalPrediction)}`));
    pred.appendChild(el("span", "arrow", "->"));
    pred.appendChild(el("span", "current-pred", `current ${fmt(snap.prediction)}`));
    pred.appendChild(
      el(
        "span",
        delta >= 0 ? "delta-positive" : "delta-negative",
        ` (${delta >= 0 ? "+" : ""}${(delta * 100).toFixed(2)} pts)`,
      ),
    );
  }
  root.appendChild(pred);

  if (snap.warnings.length) {
    const warn = el("div", "warnings");
    for (const w of snap.warnings) warn.appendChild(el("p", "warning", w));
    root.appendChild(warn);
  }
  if (snap.error) {
    root.appendChild(el("p", "edit-error", snap.error));
  }

  if (snap.detail?.kind === "text") {
    const chips = el("div", "token-chips");
    for (const token of session.currentTokens()) {
      const chip = el("span", "chip");
      chip.appendChild(el("span", "chip-token", token));
      const x = el("button", "chip-remove", "x");
      x.dataset.token = token;
      x.addEventListener("click", () => {
        void session.applyEdit({ op: "remove_token", token }).catch(() => undefined);
      });
      chip.appendChild(x);
      chips.appendChild(chip);
    }
    root.appendChild(chips);

    const addRow = el("div", "add-token-row");
    const input = el("input", "add-token-input") as HTMLInputElement;
    input.placeholder = "add word";
    const addBtn = el("button", "add-token", "add");
    addBtn.addEventListener("click", () => {
      if (input.value.trim()) {
        void session
          .applyEdit({ op: "add_token", token: input.value.trim() })
          .catch(() => undefined);
        input.value = "";
      }
    });
    addRow.appendChild(input);
    addRow.appendChild(addBtn);
    root.appendChild(addRow);
  } else if (snap.detail) {
    root.appendChild(renderSensorEditor(session, snap));
  }

  const historyPanel = el("div", "history-panel");
  historyPanel.appendChild(el("h3", undefined, `Edits (${snap.edits.length})`));
  const list = el("ol", "edit-history");
  for (const edit of snap.edits) {
    list.appendChild(el("li", "edit-entry", describeEdit(edit)));
  }
  historyPanel.appendChild(list);
  const undoBtn = el("button", "undo", "undo");
  undoBtn.disabled = snap.edits.length === 0;
  undoBtn.addEventListener("click", () => {
    void session.undo().catch(() => undefined);
  });
  historyPanel.appendChild(undoBtn);
  const reexplain = el("button", "re-explain", "re-explain");
  reexplain.addEventListener("click", () => {
    void session.reexplain().catch(() => undefined);
  });
  historyPanel.appendChild(reexplain);
  if (snap.explanationStale) {
    historyPanel.appendChild(
      el("span", "stale-note", "explanation is for a previous state"),
    );
  }
  root.appendChild(historyPanel);
  return root;
}

function renderSensorEditor(session: Session, snap: SessionSnapshot): HTMLElement {
  const sensors = snap.detail?.sensors ?? 0;
  const steps = snap.detail?.window_size ?? 0;
  const root = el("div", "sensor-editor");

  const setRow = el("div", "set-value-row");
  const sensorIn = numberInput("sensor", 0, sensors - 1);
  const stepIn = numberInput("timestep", 0, steps - 1);
  const valueIn = numberInput("value");
  const setBtn = el("button", "set-value", "set value");
  setBtn.addEventListener("click", () => {
    void session
      .applyEdit({
        op: "set_value",
        sensor: Number(sensorIn.value),
        timestep: Number(stepIn.value),
        value: Number(valueIn.value),
      })
      .catch(() => undefined);
  });
  for (const node of [sensorIn, stepIn, valueIn, setBtn]) setRow.appendChild(node);
  root.appendChild(setRow);

  const deltaRow = el("div", "add-delta-row");
  const dSensor = numberInput("sensor", 0, sensors - 1);
  const dFrom = numberInput("from t", 0, steps - 1);
  const dTo = numberInput("to t", 0, steps - 1);
  const dDelta = numberInput("delta");
  const deltaBtn = el("button", "add-delta", "apply delta to range");
  deltaBtn.addEventListener("click", () => {
    void session
      .applyEdit({
        op: "add_delta",
        sensor: Number(dSensor.value),
        t_start: Number(dFrom.value),
        t_end: Number(dTo.value),
        delta: Number(dDelta.value),
      })
      .catch(() => undefined);
  });
  for (const node of [dSensor, dFrom, dTo, dDelta, deltaBtn]) deltaRow.appendChild(node);
  root.appendChild(deltaRow);
  return root;
}

function numberInput(placeholder: string, min?: number, max?: number): HTMLInputElement {
  const input = el("input") as HTMLInputElement;
  input.type = "number";
  input.placeholder = placeholder;
  if (min !== undefined) input.min = String(min);
  if (max !== undefined) input.max = String(max);
  input.step = "any";
  return input;
}
