// @vitest-environment node
//
// Round-trip against a live service. Start one with e.g.
//   lionex serve -w <workspace> --port 8081
// and run: LIONEX_SERVICE_URL=http://127.0.0.1:8081 npm run test:integration
//
// Covers the full explorer loop: select -> remove token (probability
// changes) -> undo (original probability restored) -> re-explain (charts
// refresh for the edited instance) -> history replay reproduces the state.

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { Session } from "../src/state";

const base = process.env.LIONEX_SERVICE_URL;
const live = base ? describe : describe.skip;

live("explorer round-trip against a live service", () => {
  const api = new ApiClient(base!);
  let instanceId: string;

  beforeAll(async () => {
    const info = await api.modelInfo();
    expect(info.kind).toBe("text");
    const list = await api.instances("test", 10);
    expect(list.instances.length).toBeGreaterThan(0);
    instanceId = list.instances[0].id;
  });

  it("selecting an instance loads prediction and explanation", async () => {
    const session = new Session(api, "lionets", 7);
    await session.select(instanceId);
    const snap = session.snapshot();
    expect(snap.prediction).not.toBeNull();
    expect(snap.explanation).not.toBeNull();
    expect(snap.explanation!.importances.length).toBeGreaterThan(0);
  });

  it("remove -> undo returns exactly to the original probability", async () => {
    const session = new Session(api, "lionets", 7);
    await session.select(instanceId);
    const original = session.snapshot().prediction!;
    const token = session.currentTokens()[0];
    expect(token).toBeTruthy();

    await session.applyEdit({ op: "remove_token", token });
    const removed = session.snapshot().prediction!;
    expect(removed).not.toBe(original);

    await session.undo();
    expect(session.snapshot().prediction).toBe(original);
    expect(session.snapshot().edits).toHaveLength(0);
  });

  it("re-explain refreshes the explanation for the edited instance", async () => {
    const session = new Session(api, "lionets", 7);
    await session.select(instanceId);
    const before = session.snapshot().explanation!;
    const token = session.currentTokens()[0];
    await session.applyEdit({ op: "remove_token", token });
    expect(session.snapshot().explanationStale).toBe(true);

    await session.reexplain();
    const snap = session.snapshot();
    expect(snap.explanationStale).toBe(false);
    // the refreshed explanation is for the edited instance: its model
    // prediction matches the displayed what-if prediction, not the original
    expect(snap.explanation!.model_prediction).toBeCloseTo(snap.prediction!, 9);
    expect(snap.explanation!.model_prediction).not.toBe(before.model_prediction);
  });

  it("history replay reproduces the displayed state", async () => {
    const session = new Session(api, "lionets", 7);
    await session.select(instanceId);
    const tokens = session.currentTokens();
    await session.applyEdit({ op: "remove_token", token: tokens[0] });
    await session.applyEdit({ op: "add_token", token: tokens[1] });
    const before = session.snapshot();
    await session.replay();
    const after = session.snapshot();
    expect(after.prediction).toBe(before.prediction);
    expect(after.edits).toEqual(before.edits);
    expect(session.currentTokens()).toEqual(
      before.lastWhatIf!.edited_tokens,
    );
  });

  it("rejected edits leave the session untouched", async () => {
    const session = new Session(api, "lionets", 7);
    await session.select(instanceId);
    const before = session.snapshot();
    await expect(
      session.applyEdit({
        op: "set_value",
        sensor: 0,
        timestep: 0,
        value: 1,
      }),
    ).rejects.toThrow();
    const after = session.snapshot();
    expect(after.prediction).toBe(before.prediction);
    expect(after.edits).toEqual(before.edits);
  });
});
