"""Deterministic in-process backends.

The mock generator is a pure function of (prompt, seed, decoding params): a
splitmix64 stream fills sentence templates with tokens drawn from the shipped
genre lexicon files. It recognises the pipeline's three prompt shapes (plot,
dialogue, scene) and emits text in the matching surface format so the full
pipeline can run end-to-end with no model anywhere.

The classifier and embedder are simple but semantically meaningful (lexicon
counts, hashed bag-of-words); the perplexity scorer is hash-derived plumbing
with no semantic content.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from functools import lru_cache
from importlib import resources

from ..domain import Genre
from ..errors import EmptyText
from ..util import Splitmix64, fnv1a64, mix64
from .base import (
    Embedding,
    GenerationRequest,
    GenreDistribution,
    PerplexityScore,
)

_WORD_RE = re.compile(r"\w+", re.UNICODE)

CLASSIFIER_SMOOTHING = 0.1
EMBEDDING_DIM = 256


@lru_cache(maxsize=1)
def load_lexicons() -> dict[Genre, tuple[str, ...]]:
    """Genre -> lowercase token tuple, read from the packaged lexicon files."""
    out: dict[Genre, tuple[str, ...]] = {}
    for genre in Genre.control_genres():
        ref = resources.files("vscript.data.lexicons").joinpath(f"{genre.value}.json")
        doc = json.loads(ref.read_text(encoding="utf-8"))
        out[genre] = tuple(doc["tokens"])
    return out


def _tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


# --- text generation ----------------------------------------------------------

_NEUTRAL_WORDS = (
    "traveler", "market", "village", "letter", "river", "stranger",
    "promise", "winter", "orchard", "festival", "lantern", "bridge",
)

_NAMES = (
    "Amy", "Bo", "Cara", "Drew", "Elle", "Finn", "Grace", "Hugh", "Iris",
    "Jack", "Lena", "Marco", "Nina", "Owen", "Priya", "Quinn", "Rosa",
    "Saul", "Tara", "Vic",
)

_PLACES = {
    Genre.CRIME: ("PRECINCT", "WAREHOUSE", "ALLEY", "COURTHOUSE", "PAWN SHOP"),
    Genre.SCIFI: ("SPACE STATION", "LAUNCH BAY", "REACTOR CORE", "OBSERVATORY DOME", "CRYO VAULT"),
    Genre.WAR: ("COMMAND BUNKER", "TRENCH LINE", "FIELD HOSPITAL", "AIRSTRIP", "SUPPLY DEPOT"),
    Genre.ROMANCE: ("BALLROOM", "ROSE GARDEN", "CAFE", "LAKESIDE PIER", "CHAPEL"),
    None: ("KITCHEN", "OFFICE", "STREET", "PARK", "LIBRARY"),
}

_PLOT_FRAGMENTS = (
    "uncovered a {w0} hidden beneath the {w1}.",
    "followed the {w0} into the {w1}.",
    "never expected the {w0} waiting near the {w1}.",
    "kept watch over the {w0} beside the {w1}.",
)

_PLOT_SENTENCES = (
    "The {w0} changed hands before the {w1} was found.",
    "A {w0} surfaced near the old {w1}.",
    "{name} traded the {w0} for a {w1} at dusk.",
    "Nobody trusted the {w0} after the {w1}.",
    "Word of the {w0} reached the {w1} by morning.",
    "Every trail from the {w0} led back to the {w1}.",
)

_DIALOGUE_LINES = (
    "Did you see the {w}?",
    "The {w} is ours if we move tonight.",
    "I can't stop thinking about the {w}.",
    "Keep your voice down about the {w}.",
    "We bring the {w}, or we walk away.",
    "After the {w}, nothing felt the same.",
    "Tell me the truth about the {w}.",
)

_SCENE_SENTENCES = (
    "A {w0} sits half-lit beside the {w1}.",
    "Dust drifts across the {w0} while the {w1} hums.",
    "Someone has left a {w0} next to the {w1}.",
    "Shadows pool around the {w0} and the {w1}.",
)


class MockTextGenerator:
    """Seeded template generator; referentially transparent per request."""

    def __init__(self, drift_prob: float = 0.25):
        # drift_prob: chance a plot candidate borrows its content words from a
        # different genre, giving the rescorer real work to do.
        self.drift_prob = drift_prob
        self._lexicons = load_lexicons()

    def generate(self, request: GenerationRequest) -> list[str]:
        base = mix64(
            request.seed,
            fnv1a64(request.prompt.encode("utf-8")),
            request.top_k,
            int(request.temperature * 1000),
            request.max_new_tokens,
        )
        outputs = []
        for i in range(request.num_candidates):
            rng = Splitmix64(mix64(base, i))
            text = self._complete(request.prompt, request.max_new_tokens, rng)
            if request.stop_marker and request.stop_marker in text:
                text = text[: text.index(request.stop_marker)]
            outputs.append(text)
        return outputs

    # prompt-shape dispatch

    def _complete(self, prompt: str, max_new_tokens: int, rng: Splitmix64) -> str:
        if prompt.startswith("Summary: ") and "\nDialogue:" in prompt:
            return self._dialogue(prompt, rng)
        if prompt.rstrip().endswith("Scene:"):
            return self._scene(prompt, rng)
        return self._plot(prompt, max_new_tokens, rng)

    def _prompt_genre(self, prompt: str) -> Genre | None:
        for genre in Genre.control_genres():
            if prompt.startswith(genre.control_code or ""):
                return genre
        bag = Counter(_tokenize(prompt))
        counts = {g: sum(bag[t] for t in lex) for g, lex in self._lexicons.items()}
        best = max(counts.values())
        if best == 0:
            return None
        winners = [g for g, c in counts.items() if c == best]
        return winners[0] if len(winners) == 1 else None

    def _content_words(self, genre: Genre | None, drifted_to: Genre | None) -> tuple[str, ...]:
        if drifted_to is not None:
            return self._lexicons[drifted_to]
        if genre is None:
            return _NEUTRAL_WORDS
        return self._lexicons[genre]

    def _plot(self, prompt: str, max_new_tokens: int, rng: Splitmix64) -> str:
        genre = self._prompt_genre(prompt)
        drifted_to = None
        if genre is not None and rng.next_float() < self.drift_prob:
            others = [g for g in Genre.control_genres() if g is not genre]
            drifted_to = others[rng.next_below(len(others))]
        words = self._content_words(genre, drifted_to)

        n_pieces = min(8, max(1, round(max_new_tokens / 50)))
        pieces = [self._fill(rng.choice(_PLOT_FRAGMENTS), words, rng)]
        for _ in range(n_pieces - 1):
            pieces.append(self._fill(rng.choice(_PLOT_SENTENCES), words, rng))
        return " ".join(pieces)

    def _dialogue(self, prompt: str, rng: Splitmix64) -> str:
        genre = self._prompt_genre(prompt)
        words = self._content_words(genre, None)
        first = rng.choice(_NAMES)
        second = rng.choice([n for n in _NAMES if n != first])
        speakers = (first, second)
        n_turns = 3 + rng.next_below(3)
        lines = []
        for i in range(n_turns):
            template = rng.choice(_DIALOGUE_LINES)
            lines.append(f"{speakers[i % 2]}: {template.format(w=rng.choice(words))}")
        return "\n".join(lines)

    def _scene(self, prompt: str, rng: Splitmix64) -> str:
        genre = self._prompt_genre(prompt)
        words = self._content_words(genre, None)
        places = _PLACES[genre] if genre in _PLACES else _PLACES[None]
        roll = rng.next_float()
        setting = "INT." if roll < 0.6 else ("EXT." if roll < 0.9 else "INT/EXT.")
        time_of_day = "DAY" if rng.next_float() < 0.5 else "NIGHT"
        header = f"{setting} {rng.choice(places)} - {time_of_day}"
        n_sentences = 1 + rng.next_below(2)
        body = " ".join(self._fill(rng.choice(_SCENE_SENTENCES), words, rng)
                        for _ in range(n_sentences))
        return f"{header}\n{body}"

    def _fill(self, template: str, words: tuple[str, ...], rng: Splitmix64) -> str:
        return template.format(
            w0=rng.choice(words),
            w1=rng.choice(words),
            name=rng.choice(_NAMES),
        )


class MockGenreClassifier:
    """Additively smoothed lexicon-hit frequencies over the four genres."""

    def __init__(self, smoothing: float = CLASSIFIER_SMOOTHING):
        self.smoothing = smoothing
        self._lexicons = load_lexicons()

    def classify(self, text: str) -> GenreDistribution:
        if not text.strip():
            raise EmptyText("cannot classify empty text")
        tokens = _tokenize(text)
        scores = {}
        for genre, lexicon in self._lexicons.items():
            lexset = set(lexicon)
            scores[genre] = sum(1 for t in tokens if t in lexset) + self.smoothing
        total = sum(scores.values())
        return GenreDistribution({g: s / total for g, s in scores.items()})


class MockTextEmbedder:
    """Signed hashed bag-of-words: FNV-1a 64 per token, bucket = hash mod dim,
    sign from bit 63, accumulated then L2-normalised."""

    def __init__(self, dim: int = EMBEDDING_DIM):
        self.dim = dim

    def embed(self, texts: list[str]) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> Embedding:
        vec = [0.0] * self.dim
        for token in _tokenize(text):
            h = fnv1a64(token.encode("utf-8"))
            sign = 1.0 if h & (1 << 63) else -1.0
            vec[h % self.dim] += sign
        norm = sum(v * v for v in vec) ** 0.5
        if norm == 0.0:
            return Embedding(self.dim, tuple(vec))
        return Embedding(self.dim, tuple(v / norm for v in vec))


class MockPerplexityScorer:
    """Hash-derived scores for plumbing tests only; carries no semantics."""

    def score(self, text: str) -> PerplexityScore:
        if not text.strip():
            raise EmptyText("cannot score empty text")
        h = fnv1a64(" ".join(text.split()).encode("utf-8"))
        mean_nll = 0.5 + (h % 4096) / 1024.0
        return PerplexityScore(mean_nll_per_token=mean_nll,
                               token_count=max(1, len(text.split())))
