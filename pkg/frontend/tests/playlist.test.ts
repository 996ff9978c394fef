import { describe, expect, it } from "vitest";

import type { PresentationEntry } from "../src/api.js";
import {
  PlaylistController,
  buildPlaylist,
  type MediaSurface,
  type PlayItem,
} from "../src/playlist.js";

function entry(
  sceneIndex: number,
  withClip = true,
  relaxed = false,
): PresentationEntry {
  return {
    scene_index: sceneIndex,
    relaxed,
    score: withClip ? 0.9 : null,
    clip: withClip
      ? {
          id: `clip-${sceneIndex}`,
          uri: `videos/${sceneIndex}.mp4`,
          start_s: 2,
          end_s: 5,
          caption: `caption ${sceneIndex}`,
        }
      : null,
  };
}

class FakeSurface implements MediaSurface {
  events: string[] = [];
  highlights: number[] = [];

  async playClip(item: PlayItem): Promise<void> {
    this.events.push(`clip:${item.sceneIndex}`);
  }

  async showPlaceholder(item: PlayItem): Promise<void> {
    this.events.push(`placeholder:${item.sceneIndex}`);
  }

  setMusic(music: { mood_tag: string } | null): void {
    this.events.push(music ? `music:${music.mood_tag}` : "music:off");
  }

  highlightScene(sceneIndex: number): void {
    this.highlights.push(sceneIndex);
  }

  clearHighlight(): void {
    this.events.push("highlight:clear");
  }
}

describe("buildPlaylist", () => {
  it("orders items by scene index no matter the arrival order", () => {
    const playlist = buildPlaylist([entry(2), entry(0), entry(1)]);
    expect(playlist.map((p) => p.sceneIndex)).toEqual([0, 1, 2]);
  });
});

describe("PlaylistController", () => {
  it("plays clips in order with highlighting and a music bed", async () => {
    const surface = new FakeSurface();
    const controller = new PlaylistController(surface);
    const played = await controller.play(
      [entry(0), entry(1), entry(2)],
      { uri: "m.ogg", mood_tag: "intense" },
    );
    expect(played).toEqual([0, 1, 2]);
    expect(surface.highlights).toEqual([0, 1, 2]);
    expect(surface.events).toEqual([
      "music:intense",
      "clip:0",
      "clip:1",
      "clip:2",
      "highlight:clear",
      "music:off",
    ]);
  });

  it("shows a placeholder for a missing clip and keeps going", async () => {
    const surface = new FakeSurface();
    const controller = new PlaylistController(surface);
    const played = await controller.play(
      [entry(0), entry(1, false), entry(2)],
      null,
    );
    expect(played).toEqual([0, 1, 2]);
    expect(surface.events).toContain("placeholder:1");
    expect(surface.events).toContain("clip:2");
  });

  it("stop() halts the sequence", async () => {
    const surface = new FakeSurface();
    const controller = new PlaylistController(surface);
    let count = 0;
    surface.playClip = async () => {
      count += 1;
      if (count === 1) controller.stop();
    };
    const played = await controller.play([entry(0), entry(1)], null);
    expect(played).toEqual([0]);
    expect(count).toBe(1);
  });
});
