import type { ClipRef, MusicDescriptor, PresentationEntry } from "./api.js";

export interface PlayItem {
  sceneIndex: number;
  clip: ClipRef | null;
  relaxed: boolean;
}

export const PLACEHOLDER_MS = 1500;

// Scene order is authoritative regardless of how entries arrived.
export function buildPlaylist(entries: PresentationEntry[]): PlayItem[] {
  return [...entries]
    .sort((a, b) => a.scene_index - b.scene_index)
    .map((entry) => ({
      sceneIndex: entry.scene_index,
      clip: entry.clip,
      relaxed: entry.relaxed,
    }));
}

// The DOM (or a test fake) implements this surface; the controller owns
// ordering, placeholders and scene highlighting.
export interface MediaSurface {
  playClip(item: PlayItem): Promise<void>;
  showPlaceholder(item: PlayItem, ms: number): Promise<void>;
  setMusic(music: MusicDescriptor | null): void;
  highlightScene(sceneIndex: number): void;
  clearHighlight(): void;
}

export class PlaylistController {
  private cancelled = false;
  private running = false;

  constructor(private readonly surface: MediaSurface) {}

  get isRunning(): boolean {
    return this.running;
  }

  stop(): void {
    this.cancelled = true;
  }

  // Plays clips in scene order; a missing clip shows a placeholder card and
  // playback continues. Resolves with the scene indices actually played.
  async play(
    entries: PresentationEntry[],
    music: MusicDescriptor | null,
  ): Promise<number[]> {
    this.cancelled = false;
    this.running = true;
    this.surface.setMusic(music);
    const played: number[] = [];
    try {
      for (const item of buildPlaylist(entries)) {
        if (this.cancelled) break;
        this.surface.highlightScene(item.sceneIndex);
        if (item.clip) {
          await this.surface.playClip(item);
        } else {
          await this.surface.showPlaceholder(item, PLACEHOLDER_MS);
        }
        played.push(item.sceneIndex);
      }
    } finally {
      this.surface.clearHighlight();
      this.surface.setMusic(null);
      this.running = false;
    }
    return played;
  }
}
