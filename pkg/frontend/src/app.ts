import { ApiError, StudioApi } from "./api.js";
import type {
  MusicDescriptor,
  PresentationEntry,
  SessionView,
} from "./api.js";
import { SessionPoller } from "./poller.js";
import { SteerQueue } from "./steerQueue.js";
import { PlaylistController } from "./playlist.js";
import type { MediaSurface, PlayItem } from "./playlist.js";

// Exactly the five selectable genres, in display order.
export const GENRE_OPTIONS: ReadonlyArray<{ value: string; label: string }> = [
  { value: "crime", label: "Crime" },
  { value: "scifi", label: "Sci-Fi" },
  { value: "war", label: "War" },
  { value: "romance", label: "Romance" },
  { value: "genre_free", label: "Genre-Free" },
];

function el<T extends HTMLElement>(root: ParentNode, id: string): T {
  const node = root.querySelector<T>(`#${id}`);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

// Thin DOM adapter for clip playback; sequencing lives in PlaylistController.
class DomMediaSurface implements MediaSurface {
  constructor(
    private readonly video: HTMLVideoElement,
    private readonly music: HTMLAudioElement,
    private readonly captionLine: HTMLElement,
    private readonly scriptArea: HTMLElement,
  ) {}

  async playClip(item: PlayItem): Promise<void> {
    const clip = item.clip;
    if (!clip) return;
    this.captionLine.textContent = clip.caption;
    this.video.src = clip.uri;
    this.video.muted = true;
    await new Promise<void>((resolve) => {
      const finish = () => {
        this.video.removeEventListener("timeupdate", onTime);
        this.video.removeEventListener("ended", finish);
        this.video.removeEventListener("error", finish);
        resolve();
      };
      const onTime = () => {
        if (this.video.currentTime >= clip.end_s) {
          this.video.pause();
          finish();
        }
      };
      this.video.addEventListener("timeupdate", onTime);
      this.video.addEventListener("ended", finish);
      this.video.addEventListener("error", finish);
      try {
        this.video.currentTime = clip.start_s;
        const playing = this.video.play();
        if (playing && typeof playing.catch === "function") {
          playing.catch(finish);
        }
      } catch {
        finish();
      }
    });
  }

  showPlaceholder(item: PlayItem, ms: number): Promise<void> {
    this.captionLine.textContent = `scene ${item.sceneIndex + 1}: no clip retrieved`;
    return new Promise((resolve) => setTimeout(resolve, ms));
  }

  setMusic(music: MusicDescriptor | null): void {
    if (music) {
      this.music.src = music.uri;
      this.music.loop = true;
      try {
        const playing = this.music.play();
        if (playing && typeof playing.catch === "function") {
          playing.catch(() => undefined);
        }
      } catch {
        // autoplay restrictions; the mood tag still shows
      }
    } else {
      try {
        this.music.pause();
      } catch {
        // jsdom has no media implementation
      }
    }
  }

  highlightScene(sceneIndex: number): void {
    this.clearHighlight();
    const block = this.scriptArea.querySelectorAll("pre.script-block");
    // highlight is per-scene via data attributes on clip cards; the script
    // area gets a coarse marker class while playback runs
    for (const node of block) node.classList.add("playing");
    const card = this.scriptArea.ownerDocument?.querySelector(
      `[data-scene-card="${sceneIndex}"]`,
    );
    card?.classList.add("active-scene");
  }

  clearHighlight(): void {
    const doc = this.scriptArea.ownerDocument;
    if (!doc) return;
    for (const node of doc.querySelectorAll(".active-scene")) {
      node.classList.remove("active-scene");
    }
    for (const node of this.scriptArea.querySelectorAll("pre.playing")) {
      node.classList.remove("playing");
    }
  }
}

export class StudioApp {
  readonly api: StudioApi;
  private readonly poller: SessionPoller;
  private readonly steerQueue = new SteerQueue();
  private readonly playlist: PlaylistController;

  private sessionId: string | null = null;
  private committedBlocks: string[] = [];
  private committedLength = 0;
  private lastView: SessionView | null = null;

  private readonly genreSelect: HTMLSelectElement;
  private readonly wordsInput: HTMLInputElement;
  private readonly startButton: HTMLButtonElement;
  private readonly steerWords: HTMLInputElement;
  private readonly steerButton: HTMLButtonElement;
  private readonly playButton: HTMLButtonElement;
  private readonly scriptArea: HTMLElement;
  private readonly clipList: HTMLElement;
  private readonly statusLine: HTMLElement;
  private readonly errorBanner: HTMLElement;
  private readonly genreBadge: HTMLElement;
  private readonly musicLine: HTMLElement;
  private readonly historyList: HTMLElement;

  constructor(
    private readonly doc: Document,
    api?: StudioApi,
    pollIntervalMs = 1000,
  ) {
    this.api = api ?? new StudioApi(resolveApiBase(doc));
    this.poller = new SessionPoller(this.api, pollIntervalMs);

    this.genreSelect = el(doc, "genre-select");
    this.wordsInput = el(doc, "starting-words");
    this.startButton = el(doc, "start-btn");
    this.steerWords = el(doc, "steer-words");
    this.steerButton = el(doc, "steer-btn");
    this.playButton = el(doc, "play-btn");
    this.scriptArea = el(doc, "script-area");
    this.clipList = el(doc, "clip-list");
    this.statusLine = el(doc, "status-line");
    this.errorBanner = el(doc, "error-banner");
    this.genreBadge = el(doc, "genre-badge");
    this.musicLine = el(doc, "music-line");
    this.historyList = el(doc, "history-list");

    this.playlist = new PlaylistController(
      new DomMediaSurface(
        el(doc, "clip-video"),
        el(doc, "music-audio"),
        el(doc, "player-caption"),
        this.scriptArea,
      ),
    );

    this.populateGenres();
    this.wireEvents();
    this.refreshControls();
  }

  private populateGenres(): void {
    this.genreSelect.replaceChildren();
    for (const option of GENRE_OPTIONS) {
      const node = this.doc.createElement("option");
      node.value = option.value;
      node.textContent = option.label;
      this.genreSelect.appendChild(node);
    }
  }

  private wireEvents(): void {
    this.wordsInput.addEventListener("input", () => this.refreshControls());
    this.startButton.addEventListener("click", () => {
      void this.start();
    });
    this.steerButton.addEventListener("click", () => {
      void this.steer();
    });
    this.playButton.addEventListener("click", () => {
      void this.playPresentation();
    });
  }

  private refreshControls(): void {
    this.startButton.disabled = this.wordsInput.value.trim() === "";
    const steerable =
      this.sessionId !== null &&
      this.lastView !== null &&
      ["running", "complete"].includes(this.lastView.status);
    this.steerButton.disabled = !steerable;
    this.playButton.disabled =
      this.lastView === null || this.lastView.presentation.length === 0;
  }

  // --- lifecycle ---

  async start(): Promise<SessionView | null> {
    const words = this.wordsInput.value.trim();
    if (!words) return null;
    this.clearError();
    this.startButton.disabled = true;
    this.statusLine.textContent = "starting session…";
    this.committedBlocks = [];
    this.committedLength = 0;
    try {
      const created = await this.api.createSession(
        this.genreSelect.value,
        words,
      );
      this.sessionId = created.id;
      this.doc.defaultView?.history?.replaceState?.(
        null,
        "",
        `#s=${created.id}`,
      );
      const finalView = await this.poller.track(created.id, (view) =>
        this.renderView(view),
      );
      return finalView;
    } catch (error) {
      this.showError(error);
      return null;
    } finally {
      this.refreshControls();
    }
  }

  // Resume from a session id in the URL hash; the whole view rebuilds from
  // one GET (plus polling if it is still running).
  async resume(): Promise<SessionView | null> {
    const hash = this.doc.defaultView?.location?.hash ?? "";
    const match = /#s=([A-Za-z0-9_-]+)/.exec(hash);
    if (!match) return null;
    this.sessionId = match[1];
    try {
      return await this.poller.track(this.sessionId, (view) =>
        this.renderView(view),
      );
    } catch (error) {
      this.showError(error);
      return null;
    } finally {
      this.refreshControls();
    }
  }

  async steer(): Promise<SessionView | null> {
    if (!this.sessionId) return null;
    const id = this.sessionId;
    const words = this.steerWords.value.trim();
    const genre = this.genreSelect.value;
    const genreChanged = this.lastView !== null && genre !== this.lastView.genre;
    if (!words && !genreChanged) {
      this.statusLine.textContent =
        "steer needs new words or a different genre";
      return null;
    }
    this.clearError();
    this.statusLine.textContent = "steering…";
    // freeze the current script text so appended scenes render below a divider
    if (this.lastView && this.lastView.script_text) {
      this.commitCurrentBlock();
    }
    const payload: { genre?: string; words?: string } = {};
    if (genreChanged) payload.genre = genre;
    if (words) payload.words = words;
    try {
      const view = await this.steerQueue.enqueue(() =>
        this.api.steerSession(id, payload),
      );
      this.steerWords.value = "";
      this.renderView(view);
      return view;
    } catch (error) {
      this.showError(error);
      return null;
    } finally {
      this.refreshControls();
    }
  }

  async playPresentation(): Promise<number[]> {
    if (!this.lastView) return [];
    this.playButton.disabled = true;
    try {
      return await this.playlist.play(
        this.lastView.presentation,
        this.lastView.music,
      );
    } finally {
      this.refreshControls();
    }
  }

  // --- rendering ---

  renderView(view: SessionView): void {
    this.lastView = view;
    this.sessionId = view.id;
    this.statusLine.textContent = `status: ${view.status}`;
    this.genreBadge.textContent = view.genre_display ?? view.genre;
    this.genreSelect.value = view.genre;
    this.renderScript(view.script_text);
    this.renderPresentation(view.presentation);
    this.renderHistory(view);
    this.musicLine.textContent = view.music
      ? `music: ${view.music.mood_tag}`
      : "";
    if (view.error) {
      this.errorBanner.textContent = `failed at ${view.error.stage}: ${view.error.error}`;
      this.errorBanner.hidden = false;
    }
    this.refreshControls();
  }

  private commitCurrentBlock(): void {
    if (!this.lastView) return;
    const full = this.lastView.script_text;
    const tail = full.slice(this.committedLength).replace(/^\n+/, "");
    if (tail) this.committedBlocks.push(tail);
    this.committedLength = full.length;
  }

  private renderScript(full: string): void {
    let blocks: string[];
    if (this.committedLength > 0 && full.length >= this.committedLength) {
      const tail = full.slice(this.committedLength).replace(/^\n+/, "");
      blocks = [...this.committedBlocks, tail].filter((b) => b !== "");
    } else {
      blocks = full ? [full] : [];
    }
    this.scriptArea.replaceChildren();
    blocks.forEach((text, i) => {
      if (i > 0) {
        const divider = this.doc.createElement("hr");
        divider.className = "steer-divider";
        this.scriptArea.appendChild(divider);
      }
      const pre = this.doc.createElement("pre");
      pre.className = "script-block";
      pre.textContent = text;
      this.scriptArea.appendChild(pre);
    });
    if (blocks.length === 0) {
      const empty = this.doc.createElement("p");
      empty.className = "placeholder";
      empty.textContent = "The script will appear here.";
      this.scriptArea.appendChild(empty);
    }
  }

  private renderPresentation(entries: PresentationEntry[]): void {
    this.clipList.replaceChildren();
    for (const entry of entries) {
      const card = this.doc.createElement("li");
      card.className = "clip-card";
      card.dataset.sceneCard = String(entry.scene_index);
      const title = this.doc.createElement("div");
      title.className = "clip-title";
      title.textContent = `Scene ${entry.scene_index + 1}`;
      card.appendChild(title);
      if (entry.relaxed) {
        const badge = this.doc.createElement("span");
        badge.className = "badge relaxed-badge";
        badge.textContent = "relaxed";
        badge.title = "retrieval constraints were relaxed for this slot";
        title.appendChild(badge);
      }
      const body = this.doc.createElement("div");
      body.className = "clip-body";
      if (entry.clip) {
        const caption = this.doc.createElement("p");
        caption.textContent = entry.clip.caption;
        const source = this.doc.createElement("p");
        source.className = "clip-source";
        source.textContent =
          `${entry.clip.uri} [${entry.clip.start_s.toFixed(1)}s – ` +
          `${entry.clip.end_s.toFixed(1)}s]`;
        body.appendChild(caption);
        body.appendChild(source);
      } else {
        body.className += " clip-placeholder";
        body.textContent = "no clip retrieved";
      }
      card.appendChild(body);
      this.clipList.appendChild(card);
    }
  }

  private renderHistory(view: SessionView): void {
    this.historyList.replaceChildren();
    for (const event of view.history) {
      const item = this.doc.createElement("li");
      const parts: string[] = [];
      if (event.new_genre) parts.push(`genre → ${event.new_genre}`);
      if (event.injected_words) parts.push(`“${event.injected_words}”`);
      item.textContent = parts.join(", ");
      this.historyList.appendChild(item);
    }
  }

  private showError(error: unknown): void {
    const message =
      error instanceof ApiError
        ? `${error.message}${error.stage ? ` (${error.stage})` : ""}`
        : String(error);
    this.errorBanner.textContent = message;
    this.errorBanner.hidden = false;
    this.statusLine.textContent = "request failed";
  }

  private clearError(): void {
    this.errorBanner.hidden = true;
    this.errorBanner.textContent = "";
  }
}

export function resolveApiBase(doc: Document): string {
  const win = doc.defaultView as
    | (Window & { VSCRIPT_API_BASE?: string })
    | null;
  return win?.VSCRIPT_API_BASE ?? "";
}
