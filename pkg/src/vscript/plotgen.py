"""Genre-specific plot generation.

Control-code prompting, N-candidate sampling, classifier rescoring with
argmax selection, and rule-based plot sentence segmentation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .backends.base import GenerationRequest, GenreClassifier, TextGenerator
from .domain import Genre, Plot, PlotCandidate, PlotSentence
from .errors import (
    AllCandidatesEmpty,
    EmptyStartingWords,
    GatewayError,
    NoScorableCandidate,
    NoSentences,
)
from .util import normalize_ws

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RescoreConfig:
    """Decoding and rescoring parameters; defaults are the shipped settings."""

    num_candidates: int = 10
    top_k: int = 4
    max_new_tokens: int = 200
    temperature: float = 1.0

    def __post_init__(self):
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


def build_plot_prompt(genre: Genre, starting_words: str) -> str:
    """Control-code prefix plus the user's starting words.

    GENRE_FREE passes the starting words through unchanged.
    """
    words = starting_words.strip()
    if not words:
        raise EmptyStartingWords("starting words must be non-empty")
    code = genre.control_code
    if code is None:
        return words
    return f"{code} {words}"


def strip_control_codes(text: str) -> str:
    """Remove every occurrence of any genre control code and tidy whitespace."""
    for genre in Genre.control_genres():
        code = genre.control_code
        if code:
            text = text.replace(code, " ")
    return normalize_ws(text)


def generate_plot_candidates(
    generator: TextGenerator,
    genre: Genre,
    starting_words: str,
    cfg: RescoreConfig,
    seed: int,
) -> list[PlotCandidate]:
    """Sample cfg.num_candidates continuations and compose full candidate texts.

    Each candidate text is starting_words + continuation with any control-code
    prefix stripped and whitespace normalised.
    """
    prompt = build_plot_prompt(genre, starting_words)
    request = GenerationRequest(
        prompt=prompt,
        max_new_tokens=cfg.max_new_tokens,
        top_k=cfg.top_k,
        temperature=cfg.temperature,
        num_candidates=cfg.num_candidates,
        seed=seed,
    )
    completions = generator.generate(request)
    if all(not strip_control_codes(c) for c in completions):
        raise AllCandidatesEmpty("every completion trimmed to empty text")
    words = starting_words.strip()
    return [
        PlotCandidate(text=strip_control_codes(f"{words} {completion}"),
                      candidate_index=i)
        for i, completion in enumerate(completions)
    ]


def rescore_and_select(
    classifier: GenreClassifier,
    candidates: list[PlotCandidate],
    genre: Genre,
) -> Plot:
    """Pick the candidate the classifier scores highest for the target genre.

    Ties break toward the lowest candidate_index; candidates whose
    classification fails are skipped rather than aborting the selection.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if genre is Genre.GENRE_FREE:
        raise ValueError("GENRE_FREE plots bypass rescoring")

    scored: list[PlotCandidate] = []
    for cand in candidates:
        try:
            dist = classifier.classify(cand.text)
        except GatewayError as exc:
            logger.warning("candidate %d unscorable: %s", cand.candidate_index, exc)
            continue
        scored.append(PlotCandidate(
            text=cand.text,
            candidate_index=cand.candidate_index,
            target_genre_prob=dist.probs[genre],
        ))
    if not scored:
        raise NoScorableCandidate("no candidate could be classified")

    best = scored[0]
    for cand in scored[1:]:
        if cand.target_genre_prob > best.target_genre_prob:
            best = cand
    return make_plot(best.text, genre)


def make_plot(text: str, genre: Genre) -> Plot:
    """Segment plot text into sentences and wrap it as a Plot."""
    return Plot(text=normalize_ws(text), genre=genre,
                sentences=tuple(segment_plot(text)))


# --- sentence segmentation ----------------------------------------------------

# Tokens that end with a terminator but never end a sentence.
_ABBREVIATIONS = frozenset({"mr.", "dr.", "mrs.", "st.", "vs.", "e.g.", "i.e."})

_TERMINATORS = frozenset(".!?")

_QUOTE_TOGGLE = frozenset('"')
_QUOTE_OPEN = "“"
_QUOTE_CLOSE = "”"

_MIN_FRAGMENT_CHARS = 3


def segment_plot(text: str) -> list[PlotSentence]:
    """Split plot text into sentences.

    Splits after . ! ? followed by whitespace or end of text, except inside
    double quotes or after a known abbreviation. Fragments shorter than 3
    characters merge into the previous sentence (or the next one when they
    lead the text). Joining the sentences with single spaces reproduces the
    whitespace-normalised input.
    """
    normalized = normalize_ws(text)
    if not normalized:
        raise NoSentences("text is blank")

    pieces: list[str] = []
    in_quote = False
    start = 0
    for i, ch in enumerate(normalized):
        if ch in _QUOTE_TOGGLE:
            in_quote = not in_quote
        elif ch == _QUOTE_OPEN:
            in_quote = True
        elif ch == _QUOTE_CLOSE:
            in_quote = False
        if ch not in _TERMINATORS or in_quote:
            continue
        at_end = i + 1 == len(normalized)
        if not at_end and normalized[i + 1] != " ":
            continue
        if ch == "." and _ends_with_abbreviation(normalized, i):
            continue
        pieces.append(normalized[start:i + 1])
        start = i + 2  # skip the separating space
    if start < len(normalized):
        pieces.append(normalized[start:])

    merged = _merge_short_fragments(pieces)
    return [PlotSentence(index=i, text=s) for i, s in enumerate(merged)]


def _ends_with_abbreviation(text: str, dot_index: int) -> bool:
    word_start = text.rfind(" ", 0, dot_index) + 1
    token = text[word_start:dot_index + 1].lower()
    return token in _ABBREVIATIONS


def _merge_short_fragments(pieces: list[str]) -> list[str]:
    merged: list[str] = []
    carry = ""
    for piece in pieces:
        if carry:
            piece = f"{carry} {piece}"
            carry = ""
        if len(piece.strip()) < _MIN_FRAGMENT_CHARS:
            if merged:
                merged[-1] = f"{merged[-1]} {piece}"
            else:
                carry = piece
        else:
            merged.append(piece)
    if carry:
        # Entire text was one short fragment; keep it rather than lose content.
        if merged:
            merged[-1] = f"{merged[-1]} {carry}"
        else:
            merged.append(carry)
    return merged
