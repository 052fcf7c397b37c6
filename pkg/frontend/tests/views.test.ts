import { describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api";
import { barChart, chartBarValues } from "../src/charts";
import { Session } from "../src/state";
import type { ExplanationDoc, InstanceDetail } from "../src/types";
import { renderEditor, renderExplanation, renderInstanceList } from "../src/views";
import { makeMockApi } from "./mockService";

const textDetail: InstanceDetail = {
  id: "test-0",
  split: "test",
  prediction: 0.42,
  label: 1,
  preview: "win free now",
  kind: "text",
  text: "win free now",
  tokens: ["win", "free", "now"],
};

function doc(partial: Partial<ExplanationDoc> = {}): ExplanationDoc {
  return {
    instance_id: "test-0",
    model_prediction: 0.42,
    local_prediction: 0.41,
    fidelity_mae: 1e-3,
    alpha: 1,
    seed: 7,
    importances: [
      { feature: "win", value: 0.5, importance: 0.2 },
      { feature: "free", value: 0.3, importance: -0.4 },
      { feature: "now", value: 0.2, importance: 0.1 },
      { feature: "prize", value: 0.0, importance: 0.05 },
    ],
    counterfactuals: [{ feature: "prize", importance: 0.05 }],
    ...partial,
  };
}

describe("barChart", () => {
  it("orders bars by absolute value descending", () => {
    const svg = barChart([
      { label: "a", value: 0.1 },
      { label: "b", value: -0.5 },
      { label: "c", value: 0.3 },
    ]);
    expect(chartBarValues(svg)).toEqual([-0.5, 0.3, 0.1]);
  });

  it("truncates to the requested number of bars", () => {
    const bars = Array.from({ length: 30 }, (_, i) => ({
      label: `f${i}`,
      value: i + 1,
    }));
    expect(chartBarValues(barChart(bars, 15))).toHaveLength(15);
  });
});

describe("renderExplanation", () => {
  it("renders present-word and counterfactual charts for text", () => {
    const view = renderExplanation(doc(), textDetail, []);
    expect(view.querySelectorAll(".panel")).toHaveLength(2);
    const present = view.querySelector(".present-panel svg")!;
    // only features with a non-zero value in the instance
    const labels = Array.from(present.querySelectorAll("rect")).map(
      (r) => (r as SVGRectElement).dataset.label,
    );
    expect(labels).toEqual(["free", "win", "now"]);
    expect(view.querySelector(".counterfactual-panel svg")).not.toBeNull();
  });

  it("shows none when all counterfactual importances vanish", () => {
    const view = renderExplanation(
      doc({ counterfactuals: [{ feature: "prize", importance: 0 }] }),
      textDetail,
      [],
    );
    expect(view.querySelector(".counterfactual-panel .empty-note")!.textContent).toBe(
      "none",
    );
  });

  it("shows an error panel with the raw payload on schema mismatch", () => {
    const broken = { nonsense: true, importances: "not-a-list" };
    const view = renderExplanation(broken, textDetail, []);
    expect(view.classList.contains("error-panel")).toBe(true);
    expect(view.querySelector(".raw-payload")!.textContent).toContain("not-a-list");
  });

  it("clicking a counterfactual word reports the token", () => {
    const onAdd = vi.fn();
    const view = renderExplanation(doc(), textDetail, [], {
      onAddCounterfactual: onAdd,
    });
    (view.querySelector(".cf-add") as HTMLButtonElement).click();
    expect(onAdd).toHaveBeenCalledWith("prize");
  });

  it("renders the sensor drill-down with one row per time step", () => {
    const steps = 4;
    const sensors = 2;
    const window = Array.from({ length: steps }, (_, t) =>
      Array.from({ length: sensors }, (_, s) => 0.1 * t + 0.01 * s),
    );
    const importances = Array.from({ length: steps * sensors }, (_, i) => ({
      feature: `t${Math.floor(i / sensors)}_s${i % sensors}`,
      value: 0.5,
      importance: 0.01 * (i + 1),
    }));
    const tsDetail: InstanceDetail = {
      ...textDetail,
      kind: "timeseries",
      tokens: undefined,
      window,
      window_size: steps,
      sensors,
    };
    const view = renderExplanation(
      doc({
        importances,
        counterfactuals: [],
        sensor_summary: [
          { sensor: 0, mean: 0.02, std: 0.01, min: 0.01, max: 0.07 },
          { sensor: 1, mean: 0.04, std: 0.01, min: 0.02, max: 0.08 },
        ],
      }),
      tsDetail,
      window,
      {},
      1,
    );
    const rows = view.querySelectorAll(".drill-row");
    expect(rows).toHaveLength(steps);
    // influence x value column is the product of the two service numbers
    const first = rows[0].querySelectorAll("td");
    const influence = Number(first[1].textContent);
    const value = Number(first[2].textContent);
    expect(Number(first[3].textContent)).toBeCloseTo(influence * value, 8);
  });
});

describe("renderInstanceList", () => {
  it("handles an empty workspace without crashing", () => {
    const view = renderInstanceList([], () => undefined);
    expect(view.querySelector(".empty-note")).not.toBeNull();
  });

  it("invokes the selection callback once per click", () => {
    const onSelect = vi.fn();
    const view = renderInstanceList(
      [
        {
          id: "test-0",
          split: "test",
          prediction: 0.3,
          label: 0,
          preview: "hello",
        },
      ],
      onSelect,
    );
    (view.querySelector(".instance-link") as HTMLAnchorElement).click();
    expect(onSelect).toHaveBeenCalledTimes(1);
    expect(onSelect).toHaveBeenCalledWith("test-0");
  });
});

describe("renderEditor", () => {
  it("renders removable chips for the current tokens", async () => {
    const api = makeMockApi();
    const session = new Session(api as unknown as ApiClient);
    await session.select("test-0");
    const view = renderEditor(session, session.snapshot());
    const chips = Array.from(view.querySelectorAll(".chip-token")).map(
      (c) => c.textContent,
    );
    expect(chips).toEqual(["win", "free", "now", "please"]);
    (view.querySelector(".chip-remove") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(session.snapshot().edits).toHaveLength(1);
    });
    expect(session.currentTokens()).toEqual(["free", "now", "please"]);
  });

  it("shows the edit history and disables undo when empty", async () => {
    const api = makeMockApi();
    const session = new Session(api as unknown as ApiClient);
    await session.select("test-0");
    let view = renderEditor(session, session.snapshot());
    expect((view.querySelector(".undo") as HTMLButtonElement).disabled).toBe(true);
    await session.applyEdit({ op: "add_token", token: "prize" });
    view = renderEditor(session, session.snapshot());
    expect((view.querySelector(".undo") as HTMLButtonElement).disabled).toBe(false);
    expect(view.querySelectorAll(".edit-entry")).toHaveLength(1);
    expect(view.querySelector(".edit-entry")!.textContent).toContain("prize");
  });
});
