import { describe, expect, it } from "vitest";

import { ApiError, RegrowClient } from "../src/api.js";

interface Call {
  url: string;
  method?: string;
  body?: string;
}

function clientWith(responses: Array<{ status: number; body?: unknown }>) {
  const calls: Call[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, method: init?.method, body: init?.body as string | undefined });
    const next = responses.shift() ?? { status: 500, body: {} };
    return new Response(next.body === undefined ? null : JSON.stringify(next.body), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new RegrowClient("http://svc", fetchFn), calls };
}

describe("RegrowClient", () => {
  it("creates sessions and adds examples", async () => {
    const { client, calls } = clientWith([
      { status: 201, body: { id: "abc", examples: [] } },
      { status: 201, body: { id: "abc", examples: [{ id: 1, string: "ab", label: "positive" }] } },
    ]);
    const created = await client.createSession();
    expect(created.id).toBe("abc");
    const updated = await client.addExample("abc", "ab", "positive");
    expect(updated.examples[0].string).toBe("ab");
    expect(calls[0]).toMatchObject({ url: "http://svc/sessions", method: "POST" });
    expect(calls[1]).toMatchObject({
      url: "http://svc/sessions/abc/examples",
      method: "POST",
    });
    expect(JSON.parse(calls[1].body!)).toEqual({ string: "ab", label: "positive" });
  });

  it("asks for candidates with the requested k", async () => {
    const { client, calls } = clientWith([{ status: 200, body: { candidates: [] } }]);
    await client.candidates("abc", 5);
    expect(calls[0].url).toBe("http://svc/sessions/abc/candidates?k=5");
  });

  it("surfaces machine-readable error reasons", async () => {
    const { client } = clientWith([{ status: 422, body: { reason: "positives-required" } }]);
    await expect(client.infer("abc")).rejects.toThrowError(ApiError);
    const { client: client2 } = clientWith([
      { status: 422, body: { reason: "positives-required" } },
    ]);
    try {
      await client2.infer("abc");
    } catch (err) {
      expect((err as ApiError).status).toBe(422);
      expect((err as ApiError).reason).toBe("positives-required");
    }
  });

  it("tolerates 204 responses", async () => {
    const { client } = clientWith([{ status: 204 }]);
    await expect(client.deleteSession("abc")).resolves.toBeUndefined();
  });
});
