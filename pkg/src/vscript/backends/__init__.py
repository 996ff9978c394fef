"""Backend gateway: uniform clients for generation, classification,
embedding and perplexity scoring, with deterministic mocks as the default.

Environment variables VSCRIPT_GEN_URL / VSCRIPT_CLS_URL / VSCRIPT_EMB_URL /
VSCRIPT_SCORE_URL select remote backends per capability; absence selects the
mock. VSCRIPT_BEARER_TOKEN, when set, is passed through as a bearer token.
"""

from __future__ import annotations

import os

from .base import (
    BackendSet,
    Embedding,
    GenerationRequest,
    GenreDistribution,
    PerplexityScore,
    cosine,
)
from .mock import (
    MockGenreClassifier,
    MockPerplexityScorer,
    MockTextEmbedder,
    MockTextGenerator,
)
from .remote import (
    RemoteGenreClassifier,
    RemotePerplexityScorer,
    RemoteTextEmbedder,
    RemoteTextGenerator,
)

ENV_GEN_URL = "VSCRIPT_GEN_URL"
ENV_CLS_URL = "VSCRIPT_CLS_URL"
ENV_EMB_URL = "VSCRIPT_EMB_URL"
ENV_SCORE_URL = "VSCRIPT_SCORE_URL"
ENV_BEARER_TOKEN = "VSCRIPT_BEARER_TOKEN"


def default_backends(
    env: dict[str, str] | None = None,
    urls: dict[str, str | None] | None = None,
    auth_token: str | None = None,
) -> BackendSet:
    """Build the backend set from env vars / config URLs, mocks by default.

    `urls` keys: generate, classify, embed, score. Environment variables win
    over config-supplied URLs.
    """
    env = os.environ if env is None else env
    urls = urls or {}
    token = env.get(ENV_BEARER_TOKEN) or auth_token

    def pick(env_key: str, cfg_key: str, remote_cls, mock_factory):
        url = env.get(env_key) or urls.get(cfg_key)
        if url:
            return remote_cls(url, auth_token=token)
        return mock_factory()

    return BackendSet(
        generator=pick(ENV_GEN_URL, "generate", RemoteTextGenerator, MockTextGenerator),
        classifier=pick(ENV_CLS_URL, "classify", RemoteGenreClassifier, MockGenreClassifier),
        embedder=pick(ENV_EMB_URL, "embed", RemoteTextEmbedder, MockTextEmbedder),
        scorer=pick(ENV_SCORE_URL, "score", RemotePerplexityScorer, MockPerplexityScorer),
    )


def mock_backends(drift_prob: float = 0.25) -> BackendSet:
    """All-mock backend set (the deterministic default)."""
    return BackendSet(
        generator=MockTextGenerator(drift_prob=drift_prob),
        classifier=MockGenreClassifier(),
        embedder=MockTextEmbedder(),
        scorer=MockPerplexityScorer(),
    )


__all__ = [
    "BackendSet",
    "Embedding",
    "GenerationRequest",
    "GenreDistribution",
    "PerplexityScore",
    "cosine",
    "default_backends",
    "mock_backends",
    "MockGenreClassifier",
    "MockPerplexityScorer",
    "MockTextEmbedder",
    "MockTextGenerator",
    "RemoteGenreClassifier",
    "RemotePerplexityScorer",
    "RemoteTextEmbedder",
    "RemoteTextGenerator",
]
