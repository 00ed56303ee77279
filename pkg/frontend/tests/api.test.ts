import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, ChatApi } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ChatApi", () => {
  it("posts to /sessions and returns the payload", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse(200, { session_id: "s1", message: { text: "hi" } }),
    );
    vi.stubGlobal("fetch", fetchMock);
    const api = new ChatApi("http://svc");
    const created = await api.createSession();
    expect(created.session_id).toBe("s1");
    expect(fetchMock).toHaveBeenCalledWith("http://svc/sessions", { method: "POST" });
  });

  it("sends message bodies as JSON", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, { text: "ok" }));
    vi.stubGlobal("fetch", fetchMock);
    await new ChatApi("").sendMessage("s1", "hello");
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("/sessions/s1/messages");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ text: "hello" });
  });

  it("maps error payloads onto ApiError with the detail string", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(409, { detail: "session-terminated" })),
    );
    await expect(new ChatApi("").sendMessage("s1", "x")).rejects.toMatchObject({
      status: 409,
      message: "session-terminated",
    });
  });

  it("wraps network failures as status 0", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("fetch failed")));
    try {
      await new ChatApi("").createSession();
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(0);
    }
  });

  it("healthz returns false instead of throwing", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("down")));
    expect(await new ChatApi("").healthz()).toBe(false);
  });

  it("rating requests carry item, stage and score", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, { recorded: true, count: 1 }));
    vi.stubGlobal("fetch", fetchMock);
    await new ChatApi("").rateIntention("s1", "m2", "pre", 2);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("/sessions/s1/ratings");
    expect(JSON.parse(init.body)).toEqual({ item_id: "m2", stage: "pre", score: 2 });
  });
});
