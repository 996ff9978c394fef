"""Client-side contracts for the four neural backends.

The pipeline only ever talks to these interfaces; implementations are either
the deterministic mocks (default) or HTTP clients for remote model servers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from ..domain import Genre

MAX_CANDIDATES = 64


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_new_tokens: int = 200
    top_k: int = 4
    temperature: float = 1.0
    num_candidates: int = 1
    seed: int = 0
    stop_marker: str | None = None

    def __post_init__(self):
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be > 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 1 <= self.num_candidates <= MAX_CANDIDATES:
            raise ValueError(f"num_candidates must be in [1, {MAX_CANDIDATES}]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class GenreDistribution:
    """Classifier probabilities over the four control genres."""

    probs: dict[Genre, float]

    def __post_init__(self):
        expected = set(Genre.control_genres())
        if set(self.probs) != expected:
            raise ValueError("probs must cover exactly the four control genres")
        if any(p < 0 or p > 1 for p in self.probs.values()):
            raise ValueError("probabilities must be within [0, 1]")
        if abs(sum(self.probs.values()) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1 within 1e-9")

    def argmax(self) -> Genre | None:
        """Top genre, or None when the maximum is tied."""
        best = max(self.probs.values())
        winners = [g for g, p in self.probs.items() if p == best]
        return winners[0] if len(winners) == 1 else None


@dataclass(frozen=True)
class Embedding:
    """Unit-norm sentence embedding; all-zero vector marks empty input."""

    dim: int
    values: tuple[float, ...]

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be > 0")
        if len(self.values) != self.dim:
            raise ValueError("values length must equal dim")
        norm = math.sqrt(sum(v * v for v in self.values))
        if norm != 0.0 and abs(norm - 1.0) > 1e-6:
            raise ValueError(f"embedding norm {norm} outside 1 +/- 1e-6")

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity; 0.0 when either vector is all-zero."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


@dataclass(frozen=True)
class PerplexityScore:
    mean_nll_per_token: float
    token_count: int

    def __post_init__(self):
        if self.mean_nll_per_token < 0:
            raise ValueError("mean_nll_per_token must be >= 0")
        if self.token_count < 1:
            raise ValueError("token_count must be >= 1")
        if not math.isfinite(math.exp(min(self.mean_nll_per_token, 700.0))):
            raise ValueError("perplexity must be finite")

    @property
    def perplexity(self) -> float:
        return math.exp(self.mean_nll_per_token)


class TextGenerator(Protocol):
    def generate(self, request: GenerationRequest) -> list[str]: ...


class GenreClassifier(Protocol):
    def classify(self, text: str) -> GenreDistribution: ...


class TextEmbedder(Protocol):
    def embed(self, texts: list[str]) -> list[Embedding]: ...


class PerplexityScorer(Protocol):
    def score(self, text: str) -> PerplexityScore: ...


@dataclass
class BackendSet:
    """The four clients the pipeline needs, bundled for wiring convenience."""

    generator: TextGenerator
    classifier: GenreClassifier
    embedder: TextEmbedder
    scorer: PerplexityScorer
