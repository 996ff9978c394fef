import { describe, expect, it } from "vitest";

import type { SessionView } from "../src/api.js";
import { SessionPoller } from "../src/poller.js";

function view(status: string, scriptText = ""): SessionView {
  return {
    id: "s1",
    status,
    genre: "crime",
    starting_words: "x",
    seed: 1,
    script_text: scriptText,
    presentation: [],
    music: null,
    history: [],
    warnings: [],
    error: null,
  };
}

class SequenceApi {
  calls = 0;
  constructor(private readonly views: SessionView[]) {}

  async getSession(): Promise<SessionView> {
    const index = Math.min(this.calls, this.views.length - 1);
    this.calls += 1;
    return this.views[index];
  }
}

describe("SessionPoller", () => {
  it("polls until a terminal status and reports every view", async () => {
    const api = new SequenceApi([
      view("pending"),
      view("running", "partial"),
      view("complete", "full script"),
    ]);
    const poller = new SessionPoller(api as never, 1);
    const seen: string[] = [];
    const final = await poller.track("s1", (v) => seen.push(v.status));
    expect(final.status).toBe("complete");
    expect(final.script_text).toBe("full script");
    expect(seen).toEqual(["pending", "running", "complete"]);
    expect(api.calls).toBe(3);
  });

  it("stops polling when told to", async () => {
    const api = new SequenceApi([view("running")]);
    const poller = new SessionPoller(api as never, 1);
    const tracking = poller.track("s1", (v) => {
      if (api.calls >= 2) poller.stop();
    });
    const final = await tracking;
    expect(final.status).toBe("running");
    expect(api.calls).toBeLessThanOrEqual(3);
  });

  it("failed sessions terminate the poll", async () => {
    const api = new SequenceApi([view("running"), view("failed")]);
    const poller = new SessionPoller(api as never, 1);
    const final = await poller.track("s1", () => undefined);
    expect(final.status).toBe("failed");
  });
});
