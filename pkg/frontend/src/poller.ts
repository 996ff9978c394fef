import type { SessionView, StudioApi } from "./api.js";

export const TERMINAL_STATUSES = new Set(["complete", "failed"]);

// Long-poll loop: GET the session once per interval until it reaches a
// terminal status, pushing every intermediate view to the handler so the
// script area fills in as scenes arrive.
export class SessionPoller {
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: StudioApi,
    private readonly intervalMs: number = 1000,
  ) {}

  async track(
    id: string,
    onUpdate: (view: SessionView) => void,
  ): Promise<SessionView> {
    this.stopped = false;
    for (;;) {
      const view = await this.api.getSession(id);
      onUpdate(view);
      if (TERMINAL_STATUSES.has(view.status) || this.stopped) {
        return view;
      }
      await this.sleep();
      if (this.stopped) return view;
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private sleep(): Promise<void> {
    return new Promise((resolve) => {
      this.timer = setTimeout(() => {
        this.timer = null;
        resolve();
      }, this.intervalMs);
    });
  }
}
