// Typed client for the generation service. The UI talks to exactly these
// five endpoints and renders only what they return, so any view is
// reconstructable from a single GET after a refresh.

export interface ClipRef {
  id: string;
  uri: string;
  start_s: number;
  end_s: number;
  caption: string;
}

export interface PresentationEntry {
  scene_index: number;
  relaxed: boolean;
  score: number | null;
  clip: ClipRef | null;
}

export interface MusicDescriptor {
  uri: string;
  mood_tag: string;
}

export interface SteerEventView {
  timestamp: number;
  new_genre: string | null;
  injected_words: string | null;
}

export interface SessionView {
  id: string;
  status: "pending" | "running" | "complete" | "failed" | string;
  genre: string;
  genre_display?: string;
  starting_words: string;
  seed: number;
  script_text: string;
  presentation: PresentationEntry[];
  music: MusicDescriptor | null;
  history: SteerEventView[];
  warnings: string[];
  error: { stage: string; error: string } | null;
}

export interface PresentationPayload {
  status: string;
  entries: PresentationEntry[];
  music: MusicDescriptor | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly stage?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`;
  let stage: string | undefined;
  try {
    const body = (await response.json()) as { error?: string; stage?: string };
    if (body.error) message = body.error;
    stage = body.stage;
  } catch {
    // non-JSON error body; keep the status message
  }
  return new ApiError(response.status, message, stage);
}

export class StudioApi {
  constructor(private readonly baseUrl: string = "") {}

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  createSession(
    genre: string,
    startingWords: string,
    seed?: number,
  ): Promise<{ id: string; status: string }> {
    return this.requestJson("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        genre,
        starting_words: startingWords,
        ...(seed === undefined ? {} : { seed }),
      }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return this.requestJson(`/v1/sessions/${encodeURIComponent(id)}`);
  }

  steerSession(
    id: string,
    opts: { genre?: string; words?: string },
  ): Promise<SessionView> {
    return this.requestJson(`/v1/sessions/${encodeURIComponent(id)}/steer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(opts),
    });
  }

  async getScript(id: string): Promise<string> {
    const response = await fetch(
      `${this.baseUrl}/v1/sessions/${encodeURIComponent(id)}/script`,
    );
    if (!response.ok) throw await parseError(response);
    return response.text();
  }

  getPresentation(id: string): Promise<PresentationPayload> {
    return this.requestJson(
      `/v1/sessions/${encodeURIComponent(id)}/presentation`,
    );
  }
}
