"""Core value types for plots, dialogues, scenes and scripts.

All types here are immutable value objects (frozen dataclasses), safe to
share across threads. Script-level invariants are deliberately *not*
enforced at construction time: `validate_script` reports them, and tests
need to be able to build broken instances.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .util import normalize_ws


class Genre(Enum):
    """Script genre; GENRE_FREE carries no control code."""

    CRIME = "crime"
    SCIFI = "scifi"
    WAR = "war"
    ROMANCE = "romance"
    GENRE_FREE = "genre_free"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def control_code(self) -> str | None:
        """Fixed sentence prepended to plot prompts for this genre, if any."""
        return _CONTROL_CODES.get(self)

    @classmethod
    def parse(cls, raw: str) -> "Genre":
        """Accepts 'crime', 'Sci-Fi', 'genre_free', 'Genre-Free', etc."""
        key = re.sub(r"[\s_-]+", "", raw.strip().lower())
        try:
            return _PARSE_TABLE[key]
        except KeyError:
            raise ValueError(f"unknown genre: {raw!r}") from None

    @classmethod
    def control_genres(cls) -> tuple["Genre", ...]:
        """The four genres the classifier scores (GENRE_FREE excluded)."""
        return (cls.CRIME, cls.SCIFI, cls.WAR, cls.ROMANCE)


_DISPLAY_NAMES = {
    Genre.CRIME: "Crime",
    Genre.SCIFI: "Sci-Fi",
    Genre.WAR: "War",
    Genre.ROMANCE: "Romance",
    Genre.GENRE_FREE: "Genre-Free",
}

_CONTROL_CODES = {
    Genre.CRIME: "This is a crime plot.",
    Genre.SCIFI: "This is a sci-fi plot.",
    Genre.WAR: "This is a war plot.",
    Genre.ROMANCE: "This is a romance plot.",
}

_PARSE_TABLE = {
    "crime": Genre.CRIME,
    "scifi": Genre.SCIFI,
    "war": Genre.WAR,
    "romance": Genre.ROMANCE,
    "genrefree": Genre.GENRE_FREE,
}


class Setting(Enum):
    INT = "INT"
    EXT = "EXT"
    INT_EXT = "INT_EXT"
    UNKNOWN = "UNKNOWN"


class TimeOfDay(Enum):
    DAY = "DAY"
    NIGHT = "NIGHT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class PlotSentence:
    """One sentence of a plot; each sentence expands into one scene."""

    index: int
    text: str

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("sentence index must be >= 0")
        if not self.text.strip():
            raise ValueError("sentence text must be non-empty")


@dataclass(frozen=True)
class PlotCandidate:
    """One sampled plot; target_genre_prob is filled during rescoring."""

    text: str
    candidate_index: int
    target_genre_prob: float | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("candidate text must be non-empty")
        if self.candidate_index < 0:
            raise ValueError("candidate_index must be >= 0")


@dataclass(frozen=True)
class Plot:
    text: str
    genre: Genre
    sentences: tuple[PlotSentence, ...]


@dataclass(frozen=True)
class DialogueTurn:
    speaker: str
    utterance: str

    def __post_init__(self):
        if not self.speaker.strip():
            raise ValueError("speaker must be non-empty")
        if len(self.speaker) > 30:
            raise ValueError("speaker must be <= 30 chars")
        if ":" in self.speaker or "\n" in self.speaker or "\r" in self.speaker:
            raise ValueError("speaker must not contain colons or line breaks")
        if not self.utterance.strip():
            raise ValueError("utterance must be non-empty")


@dataclass(frozen=True)
class SceneHeader:
    """Screenplay slugline fields; location is stored uppercase."""

    setting: Setting
    location: str
    time_of_day: TimeOfDay

    def __post_init__(self):
        object.__setattr__(self, "location", self.location.strip().upper())


@dataclass(frozen=True)
class Scene:
    header: SceneHeader
    description: str
    turns: tuple[DialogueTurn, ...]
    source_sentence: PlotSentence
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Script:
    genre: Genre
    plot: Plot
    scenes: tuple[Scene, ...]


_SETTING_RENDER = {
    Setting.INT: "INT",
    Setting.EXT: "EXT",
    Setting.INT_EXT: "INT/EXT",
    Setting.UNKNOWN: "UNKNOWN",
}


def render_scene_header(header: SceneHeader) -> str:
    """One slugline: "INT. LAB - DAY"; the time part is omitted when unknown."""
    line = f"{_SETTING_RENDER[header.setting]}. {header.location}"
    if header.time_of_day is not TimeOfDay.UNKNOWN:
        line += f" - {header.time_of_day.value}"
    return line.rstrip()


def render_scene(scene: Scene) -> str:
    blocks = [render_scene_header(scene.header)]
    if scene.description:
        blocks.append(scene.description)
    if scene.turns:
        blocks.append("\n".join(f"{t.speaker.upper()}\n  {t.utterance}" for t in scene.turns))
    return "\n\n".join(blocks)


def render_script(script: Script) -> str:
    """Canonical deterministic text rendering; scenes separated by two blank lines."""
    return "\n\n\n".join(render_scene(scene) for scene in script.scenes)


@dataclass(frozen=True)
class Violation:
    """One failed invariant; scene_index is None for script-level failures."""

    invariant: str
    scene_index: int | None
    detail: str


def validate_script(script: Script) -> list[Violation]:
    """Empty list iff every Script invariant holds."""
    out: list[Violation] = []

    for pos, sentence in enumerate(script.plot.sentences):
        if sentence.index != pos:
            out.append(Violation("sentence_indices", None,
                                 f"sentence at position {pos} has index {sentence.index}"))
            break
    joined = " ".join(s.text for s in script.plot.sentences)
    if normalize_ws(joined) != normalize_ws(script.plot.text):
        out.append(Violation("plot_reconstruction", None,
                             "joined sentences do not reconstruct plot text"))

    if len(script.scenes) != len(script.plot.sentences):
        out.append(Violation(
            "cardinality", None,
            f"{len(script.scenes)} scenes vs {len(script.plot.sentences)} plot sentences"))

    for i, scene in enumerate(script.scenes):
        if not scene.turns:
            out.append(Violation("empty_dialogue", i, "scene has no dialogue turns"))
        if scene.source_sentence.index != i:
            out.append(Violation("scene_alignment", i,
                                 f"source sentence index {scene.source_sentence.index}"))
        if not scene.description and "description_fallback" not in scene.flags:
            out.append(Violation("empty_description", i,
                                 "empty description without fallback flag"))
    return out


# --- structured interchange ---------------------------------------------------


def plot_sentence_to_dict(s: PlotSentence) -> dict[str, Any]:
    return {"index": s.index, "text": s.text}


def plot_to_dict(plot: Plot) -> dict[str, Any]:
    return {
        "text": plot.text,
        "genre": plot.genre.value,
        "sentences": [plot_sentence_to_dict(s) for s in plot.sentences],
    }


def scene_to_dict(scene: Scene) -> dict[str, Any]:
    return {
        "header": {
            "setting": scene.header.setting.value,
            "location": scene.header.location,
            "time_of_day": scene.header.time_of_day.value,
        },
        "description": scene.description,
        "turns": [{"speaker": t.speaker, "utterance": t.utterance} for t in scene.turns],
        "source_sentence": plot_sentence_to_dict(scene.source_sentence),
        "flags": list(scene.flags),
    }


def script_to_dict(script: Script) -> dict[str, Any]:
    return {
        "genre": script.genre.value,
        "plot": plot_to_dict(script.plot),
        "scenes": [scene_to_dict(s) for s in script.scenes],
    }


def plot_from_dict(data: dict[str, Any]) -> Plot:
    return Plot(
        text=data["text"],
        genre=Genre(data["genre"]),
        sentences=tuple(PlotSentence(s["index"], s["text"]) for s in data["sentences"]),
    )


def scene_from_dict(data: dict[str, Any]) -> Scene:
    header = data["header"]
    return Scene(
        header=SceneHeader(
            setting=Setting(header["setting"]),
            location=header["location"],
            time_of_day=TimeOfDay(header["time_of_day"]),
        ),
        description=data["description"],
        turns=tuple(DialogueTurn(t["speaker"], t["utterance"]) for t in data["turns"]),
        source_sentence=PlotSentence(data["source_sentence"]["index"],
                                     data["source_sentence"]["text"]),
        flags=tuple(data.get("flags", ())),
    )


def script_from_dict(data: dict[str, Any]) -> Script:
    return Script(
        genre=Genre(data["genre"]),
        plot=plot_from_dict(data["plot"]),
        scenes=tuple(scene_from_dict(s) for s in data["scenes"]),
    )


def script_to_json(script: Script) -> str:
    return json.dumps(script_to_dict(script), ensure_ascii=False, indent=2)


def script_from_json(text: str) -> Script:
    return script_from_dict(json.loads(text))
