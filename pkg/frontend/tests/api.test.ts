import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, StudioApi } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("StudioApi", () => {
  it("creates sessions with the documented payload", async () => {
    const fetchMock = vi.fn(async (_url: string, _init?: RequestInit) =>
      jsonResponse({ id: "s1", status: "pending" }));
    vi.stubGlobal("fetch", fetchMock);
    const api = new StudioApi("http://api");
    const created = await api.createSession("crime", "A heist", 42);
    expect(created.id).toBe("s1");
    expect(fetchMock).toHaveBeenCalledTimes(1);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://api/v1/sessions");
    expect(init?.method).toBe("POST");
    expect(JSON.parse(init?.body as string)).toEqual({
      genre: "crime",
      starting_words: "A heist",
      seed: 42,
    });
  });

  it("omits the seed when not given", async () => {
    const fetchMock = vi.fn(async (_url: string, _init?: RequestInit) =>
      jsonResponse({ id: "s1", status: "pending" }));
    vi.stubGlobal("fetch", fetchMock);
    await new StudioApi().createSession("war", "The line");
    const [, init] = fetchMock.mock.calls[0];
    expect(JSON.parse(init?.body as string)).toEqual({
      genre: "war",
      starting_words: "The line",
    });
  });

  it("steers with optional fields only", async () => {
    const fetchMock = vi.fn(async (_url: string, _init?: RequestInit) =>
      jsonResponse({ id: "s1" }));
    vi.stubGlobal("fetch", fetchMock);
    await new StudioApi().steerSession("s1", { words: "More" });
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("/v1/sessions/s1/steer");
    expect(JSON.parse(init?.body as string)).toEqual({ words: "More" });
  });

  it("fetches the rendered script as text", async () => {
    const fetchMock = vi.fn(
      async (_url: string) => new Response("INT. LAB - DAY", { status: 200 }),
    );
    vi.stubGlobal("fetch", fetchMock);
    const text = await new StudioApi().getScript("s1");
    expect(text).toBe("INT. LAB - DAY");
    expect(fetchMock.mock.calls[0][0]).toBe("/v1/sessions/s1/script");
  });

  it("surfaces {error, stage} bodies as ApiError", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse({ error: "unknown session: nope", stage: "view" }, 404),
    );
    vi.stubGlobal("fetch", fetchMock);
    const api = new StudioApi();
    try {
      await api.getSession("nope");
      expect.unreachable("should have thrown");
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      const apiError = error as ApiError;
      expect(apiError.status).toBe(404);
      expect(apiError.stage).toBe("view");
      expect(apiError.message).toContain("unknown session");
    }
  });

  it("encodes session ids in paths", async () => {
    const fetchMock = vi.fn(async (_url: string) =>
      jsonResponse({ status: "ok", entries: [], music: null }));
    vi.stubGlobal("fetch", fetchMock);
    await new StudioApi().getPresentation("weird id");
    expect(fetchMock.mock.calls[0][0]).toBe("/v1/sessions/weird%20id/presentation");
  });
});
