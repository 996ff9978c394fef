"""Scene description generation, slugline parsing, banned-content filtering
and full script assembly."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .backends.base import GenerationRequest, TextGenerator
from .dialogue import Dialogue, format_turns
from .domain import (
    DialogueTurn,
    Plot,
    Scene,
    SceneHeader,
    Script,
    Setting,
    TimeOfDay,
)
from .errors import CardinalityMismatch

logger = logging.getLogger(__name__)

SCENE_PROMPT_TEMPLATE = "Dialogue:\n{turns}\nScene:\n"

REDACTION_GLYPH = "████"  # four solid blocks

UNKNOWN_HEADER = SceneHeader(Setting.UNKNOWN, "UNKNOWN", TimeOfDay.UNKNOWN)

# (INT|EXT|INT./EXT.|INT/EXT)[.] <location> [- or en-dash] (DAY|NIGHT)
_HEADER_RE = re.compile(
    r"^\s*(?P<setting>INT\s*\.?\s*/\s*EXT|EXT\s*\.?\s*/\s*INT|INT|EXT)\.?\s+"
    r"(?P<location>.*?)"
    r"(?:\s*[-–]\s*(?P<time>DAY|NIGHT)\s*\.?)?\s*$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class BanList:
    """Lowercase terms to redact; word mode respects token boundaries."""

    terms: frozenset[str]
    match_mode: str = "word"

    def __post_init__(self):
        if self.match_mode not in ("word", "substring"):
            raise ValueError("match_mode must be 'word' or 'substring'")
        if any(not t for t in self.terms):
            raise ValueError("banned terms must be non-empty")
        object.__setattr__(self, "terms", frozenset(t.lower() for t in self.terms))

    @property
    def enabled(self) -> bool:
        return bool(self.terms)


EMPTY_BANLIST = BanList(terms=frozenset(), match_mode="word")


def load_banlist(path: str | Path, match_mode: str = "word") -> BanList:
    """One lowercase term per line; '#' starts a comment."""
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.split("#", 1)[0].strip().lower()
            if term:
                terms.add(term)
    return BanList(terms=frozenset(terms), match_mode=match_mode)


def default_banlist(match_mode: str = "word") -> BanList:
    """The packaged placeholder banlist; operators should review and extend it."""
    text = resources.files("vscript.data").joinpath("banlist.txt").read_text("utf-8")
    terms = set()
    for line in text.splitlines():
        term = line.split("#", 1)[0].strip().lower()
        if term:
            terms.add(term)
    return BanList(terms=frozenset(terms), match_mode=match_mode)


@dataclass(frozen=True)
class FilterOutcome:
    clean_text: str
    redactions: tuple[tuple[str, int], ...]


def filter_banned_content(text: str, banlist: BanList) -> FilterOutcome:
    """Replace banned terms with the redaction glyph.

    Word mode only replaces whole tokens; substring mode replaces every
    occurrence. Redactions record (term, position-in-original-text) in order.
    """
    if not banlist.enabled or not text:
        return FilterOutcome(clean_text=text, redactions=())
    # Longest-first alternation so nested terms resolve to the longest match.
    alternation = "|".join(re.escape(t) for t in
                           sorted(banlist.terms, key=len, reverse=True))
    if banlist.match_mode == "word":
        pattern = re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)
    else:
        pattern = re.compile(alternation, re.IGNORECASE)

    redactions = []

    def _sub(match: re.Match) -> str:
        redactions.append((match.group(0).lower(), match.start()))
        return REDACTION_GLYPH

    clean = pattern.sub(_sub, text)
    return FilterOutcome(clean_text=clean, redactions=tuple(redactions))


def parse_scene_header(line: str) -> SceneHeader:
    """Parse a slugline; total function, failures encode as UNKNOWN fields."""
    match = _HEADER_RE.match(line)
    if not match:
        return SceneHeader(Setting.UNKNOWN, "", TimeOfDay.UNKNOWN)
    setting_raw = re.sub(r"[\s.]", "", match.group("setting")).upper()
    setting = Setting.INT_EXT if "/" in setting_raw else Setting(setting_raw)
    location = match.group("location").strip().strip(".").strip()
    time_raw = match.group("time")
    time_of_day = TimeOfDay(time_raw.upper()) if time_raw else TimeOfDay.UNKNOWN
    return SceneHeader(setting=setting, location=location, time_of_day=time_of_day)


def generate_scene_description(
    generator: TextGenerator,
    dialogue: Dialogue,
    seed: int,
    max_new_tokens: int = 120,
    top_k: int = 4,
    temperature: float = 1.0,
) -> tuple[SceneHeader, str, bool]:
    """Generate (header, description, header_fallback) from a dialogue.

    The first output line is parsed as the scene header; if that fails the
    whole output becomes the description under an UNKNOWN header and the
    fallback flag is set.
    """
    if not dialogue.turns:
        raise ValueError("dialogue must have at least one turn")
    prompt = SCENE_PROMPT_TEMPLATE.format(turns=format_turns(dialogue.turns))
    raw = generator.generate(GenerationRequest(
        prompt=prompt,
        max_new_tokens=max_new_tokens,
        top_k=top_k,
        temperature=temperature,
        num_candidates=1,
        seed=seed,
    ))[0].strip()

    first_line, _, rest = raw.partition("\n")
    header = parse_scene_header(first_line)
    if header.setting is Setting.UNKNOWN and not header.location:
        logger.warning("scene header parse failed for sentence %d",
                       dialogue.source_sentence.index)
        return UNKNOWN_HEADER, raw.strip(), True
    return header, rest.strip(), False


def build_scene(
    sentence,
    dialogue: Dialogue,
    scene_part: tuple[SceneHeader, str] | tuple[SceneHeader, str, bool],
    banlist: BanList = EMPTY_BANLIST,
) -> Scene:
    """One filtered Scene from its plot sentence, dialogue and scene part."""
    header, description = scene_part[0], scene_part[1]
    header_fallback = bool(scene_part[2]) if len(scene_part) > 2 else False

    redactions = []
    outcome = filter_banned_content(description, banlist)
    described = outcome.clean_text
    redactions.extend(outcome.redactions)
    turns = []
    for turn in dialogue.turns:
        outcome = filter_banned_content(turn.utterance, banlist)
        redactions.extend(outcome.redactions)
        turns.append(DialogueTurn(speaker=turn.speaker,
                                  utterance=outcome.clean_text))
    turns = tuple(turns)
    if redactions:
        logger.info("scene %d: redacted %d banned term occurrence(s): %s",
                    sentence.index, len(redactions),
                    ", ".join(sorted({term for term, _ in redactions})))

    flags = []
    if header_fallback:
        flags.append("header_fallback")
    if dialogue.is_fallback:
        flags.append("dialogue_fallback")
    if not described:
        flags.append("description_fallback")
    if redactions:
        flags.append("redacted")
    return Scene(
        header=header,
        description=described,
        turns=turns,
        source_sentence=sentence,
        flags=tuple(flags),
    )


def assemble_script(
    plot: Plot,
    dialogues: list[Dialogue],
    scene_parts: list[tuple[SceneHeader, str] | tuple[SceneHeader, str, bool]],
    banlist: BanList = EMPTY_BANLIST,
) -> Script:
    """Zip plot sentences, dialogues and scene parts into a Script.

    Descriptions and utterances pass through the banned-content filter; a
    scene part may carry a header-fallback flag as a third element.
    """
    n = len(plot.sentences)
    if len(dialogues) != n or len(scene_parts) != n:
        raise CardinalityMismatch(
            f"{n} sentences vs {len(dialogues)} dialogues vs "
            f"{len(scene_parts)} scene parts")

    scenes = []
    for i, sentence in enumerate(plot.sentences):
        if dialogues[i].source_sentence.index != i:
            raise CardinalityMismatch(
                f"dialogue {i} sourced from sentence "
                f"{dialogues[i].source_sentence.index}")
        scenes.append(build_scene(sentence, dialogues[i], scene_parts[i], banlist))
    return Script(genre=plot.genre, plot=plot, scenes=tuple(scenes))
