import type { ApiClient } from "./api";
import type { Edit, ExplanationDoc, InstanceDetail, WhatIfResponse } from "./types";

export interface SessionSnapshot {
  instanceId: string | null;
  detail: InstanceDetail | null;
  edits: Edit[];
  prediction: number | null;
  originalPrediction: number | null;
  explanation: ExplanationDoc | null;
  explanationStale: boolean;
  explainer: string;
  seed: number;
  lastWhatIf: WhatIfResponse | null;
  warnings: string[];
  error: string | null;
}

type Listener = (state: SessionSnapshot) => void;

/**
 * Session state for one explored instance.
 *
 * The edits list is the single source of truth: every change posts the FULL
 * list to /api/whatif, so the displayed state is always exactly the replay
 * of the history from the untouched instance, and undo is a pop + re-post.
 * What-if requests are serialized through an internal promise queue so the
 * history stays linear even under rapid edits.
 */
export class Session {
  private state: SessionSnapshot = emptySnapshot();
  private listeners: Listener[] = [];
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    explainer = "lionets",
    seed = 7,
  ) {
    this.state.explainer = explainer;
    this.state.seed = seed;
  }

  snapshot(): SessionSnapshot {
    return { ...this.state, edits: [...this.state.edits] };
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit() {
    const snap = this.snapshot();
    for (const fn of this.listeners) fn(snap);
  }

  private update(patch: Partial<SessionSnapshot>) {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  private enqueue<T>(job: () => Promise<T>): Promise<T> {
    const next = this.queue.then(job, job);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /** Load an instance and its explanation (exactly one explain call). */
  select(instanceId: string): Promise<void> {
    return this.enqueue(async () => {
      this.update({ ...emptySnapshot(), explainer: this.state.explainer, seed: this.state.seed });
      try {
        const detail = await this.api.instance(instanceId);
        const explanation = await this.api.explain({
          instance_id: instanceId,
          explainer: this.state.explainer,
          seed: this.state.seed,
        });
        this.update({
          instanceId,
          detail,
          prediction: detail.prediction,
          originalPrediction: detail.prediction,
          explanation,
          explanationStale: false,
        });
      } catch (e) {
        this.update({ error: e instanceof Error ? e.message : String(e) });
        throw e;
      }
    });
  }

  /** Append one edit; on rejection the state is left untouched. */
  applyEdit(edit: Edit): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.instanceId) throw new Error("no instance selected");
      const attempted = [...this.state.edits, edit];
      await this.replayEdits(attempted);
    });
  }

  /** Remove the most recent edit and re-post the remaining history. */
  undo(): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.instanceId || this.state.edits.length === 0) return;
      await this.replayEdits(this.state.edits.slice(0, -1));
    });
  }

  /** Re-post the current history from scratch (state must reproduce). */
  replay(): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.instanceId) return;
      await this.replayEdits([...this.state.edits]);
    });
  }

  private async replayEdits(edits: Edit[]): Promise<void> {
    const id = this.state.instanceId!;
    try {
      const result = await this.api.whatIf(id, edits);
      this.update({
        edits,
        prediction: result.prediction,
        originalPrediction: result.original_prediction,
        lastWhatIf: result,
        warnings: result.warnings,
        explanationStale: edits.length > 0,
        error: null,
      });
    } catch (e) {
      // edit rejected: surface the message, keep the previous state
      this.update({ error: e instanceof Error ? e.message : String(e) });
      throw e;
    }
  }

  /** Refresh the explanation for the currently displayed edited instance. */
  reexplain(): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.instanceId || !this.state.detail) return;
      const base = {
        explainer: this.state.explainer,
        seed: this.state.seed,
      };
      let explanation: ExplanationDoc;
      if (this.state.edits.length === 0) {
        explanation = await this.api.explain({ ...base, instance_id: this.state.instanceId });
      } else if (this.state.detail.kind === "text") {
        const text = this.state.lastWhatIf?.edited_text ?? this.state.detail.text ?? "";
        explanation = await this.api.explain({ ...base, text });
      } else {
        const window =
          this.state.lastWhatIf?.edited_window ?? this.state.detail.window ?? [];
        explanation = await this.api.explain({ ...base, window });
      }
      this.update({ explanation, explanationStale: false });
    });
  }

  setExplainer(explainer: string) {
    this.update({ explainer, explanationStale: this.state.explanation !== null });
  }

  /** Tokens of the instance as currently displayed (after edits). */
  currentTokens(): string[] {
    if (this.state.lastWhatIf?.edited_tokens) return this.state.lastWhatIf.edited_tokens;
    return this.state.detail?.tokens ?? [];
  }

  /** Window values as currently displayed (after edits). */
  currentWindow(): number[][] {
    if (this.state.lastWhatIf?.edited_window) return this.state.lastWhatIf.edited_window;
    return this.state.detail?.window ?? [];
  }
}

function emptySnapshot(): SessionSnapshot {
  return {
    instanceId: null,
    detail: null,
    edits: [],
    prediction: null,
    originalPrediction: null,
    explanation: null,
    explanationStale: false,
    explainer: "lionets",
    seed: 7,
    lastWhatIf: null,
    warnings: [],
    error: null,
  };
}
