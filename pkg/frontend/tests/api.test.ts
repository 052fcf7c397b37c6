import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api";

function stubFetch(status: number, body: unknown) {
  const mock = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  }));
  vi.stubGlobal("fetch", mock);
  return mock;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("builds instance list URLs with query params", async () => {
    const mock = stubFetch(200, { instances: [], count: 0 });
    const api = new ApiClient("http://svc");
    await api.instances("test", 5);
    expect(mock).toHaveBeenCalledWith("http://svc/api/instances?split=test&limit=5");
  });

  it("posts whatif payloads with the edits array", async () => {
    const mock = stubFetch(200, {
      instance_id: "test-0",
      original_prediction: 0.5,
      prediction: 0.4,
      warnings: [],
    });
    const api = new ApiClient("");
    await api.whatIf("test-0", [{ op: "remove_token", token: "win" }]);
    const [url, init] = mock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/api/whatif");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      instance_id: "test-0",
      edits: [{ op: "remove_token", token: "win" }],
    });
  });

  it("surfaces service error messages with the status", async () => {
    stubFetch(400, { error: "unknown instance id 'nope'" });
    const api = new ApiClient("");
    const err = await api.instance("nope").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toContain("unknown instance");
  });

  it("falls back to the HTTP status when the body is not JSON", async () => {
    const mock = vi.fn(async () => ({
      ok: false,
      status: 502,
      json: async () => {
        throw new Error("not json");
      },
    }));
    vi.stubGlobal("fetch", mock);
    const api = new ApiClient("");
    const err = await api.modelInfo().catch((e) => e);
    expect(err.message).toBe("HTTP 502");
  });
});
