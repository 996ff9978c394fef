"""HTTP clients for remotely hosted model backends.

Wire protocol (JSON over POST, field names mirror the request/response types):

    POST {base}/v1/generate  {prompt, max_new_tokens, top_k, temperature,
                              num_candidates, seed, stop_marker}
                          -> {completions: [str, ...]}   (exactly num_candidates)
    POST {base}/v1/classify {text}        -> {probs: {crime, scifi, war, romance}}
    POST {base}/v1/embed    {texts: []}   -> {embeddings: [{dim, values}, ...]}
    POST {base}/v1/score    {text}        -> {mean_nll_per_token, token_count}

Completions are continuations only; the prompt is never echoed back.
Transport failures raise BackendUnavailable after one retry with a fixed
500 ms backoff; contract violations raise BackendMalformedReply carrying the
raw payload.
"""

from __future__ import annotations

import time
from typing import Any, Callable

import requests

from ..domain import Genre
from ..errors import BackendMalformedReply, BackendUnavailable, EmptyText
from .base import Embedding, GenerationRequest, GenreDistribution, PerplexityScore

DEFAULT_TIMEOUT_S = 30.0
RETRY_BACKOFF_S = 0.5


class _HttpJsonClient:
    def __init__(
        self,
        base_url: str,
        auth_token: str | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.auth_token = auth_token
        self.timeout_s = timeout_s
        self.session = session or requests.Session()
        self._sleep = sleep

    def post(self, path: str, payload: dict[str, Any]) -> Any:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        url = self.base_url + path
        last_exc: Exception | None = None
        for attempt in range(2):
            if attempt:
                self._sleep(RETRY_BACKOFF_S)
            try:
                resp = self.session.post(url, json=payload, headers=headers,
                                         timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"{url} returned HTTP {resp.status_code}", payload=resp.text)
            try:
                return resp.json()
            except ValueError:
                raise BackendMalformedReply(f"{url} returned non-JSON body",
                                            payload=resp.text) from None
        raise BackendUnavailable(f"{url} unreachable: {last_exc}", payload=str(last_exc))


class RemoteTextGenerator:
    def __init__(self, base_url: str, **kwargs):
        self._client = _HttpJsonClient(base_url, **kwargs)

    def generate(self, request: GenerationRequest) -> list[str]:
        reply = self._client.post("/v1/generate", {
            "prompt": request.prompt,
            "max_new_tokens": request.max_new_tokens,
            "top_k": request.top_k,
            "temperature": request.temperature,
            "num_candidates": request.num_candidates,
            "seed": request.seed,
            "stop_marker": request.stop_marker,
        })
        completions = reply.get("completions") if isinstance(reply, dict) else None
        if (not isinstance(completions, list)
                or len(completions) != request.num_candidates
                or not all(isinstance(c, str) for c in completions)):
            raise BackendMalformedReply(
                f"expected {request.num_candidates} completions", payload=reply)
        return completions


class RemoteGenreClassifier:
    def __init__(self, base_url: str, **kwargs):
        self._client = _HttpJsonClient(base_url, **kwargs)

    def classify(self, text: str) -> GenreDistribution:
        if not text.strip():
            raise EmptyText("cannot classify empty text")
        reply = self._client.post("/v1/classify", {"text": text})
        probs = reply.get("probs") if isinstance(reply, dict) else None
        if not isinstance(probs, dict):
            raise BackendMalformedReply("missing probs map", payload=reply)
        try:
            dist = GenreDistribution(
                {Genre(k): float(v) for k, v in probs.items()})
        except (ValueError, KeyError) as exc:
            raise BackendMalformedReply(f"bad probs map: {exc}", payload=reply) from None
        return dist


class RemoteTextEmbedder:
    def __init__(self, base_url: str, **kwargs):
        self._client = _HttpJsonClient(base_url, **kwargs)

    def embed(self, texts: list[str]) -> list[Embedding]:
        if not texts:
            raise ValueError("texts must be non-empty")
        reply = self._client.post("/v1/embed", {"texts": texts})
        rows = reply.get("embeddings") if isinstance(reply, dict) else None
        if not isinstance(rows, list) or len(rows) != len(texts):
            raise BackendMalformedReply(
                f"expected {len(texts)} embeddings", payload=reply)
        out = []
        for row in rows:
            try:
                out.append(Embedding(dim=int(row["dim"]),
                                     values=tuple(float(v) for v in row["values"])))
            except (TypeError, KeyError, ValueError) as exc:
                raise BackendMalformedReply(f"bad embedding row: {exc}",
                                            payload=reply) from None
        return out


class RemotePerplexityScorer:
    def __init__(self, base_url: str, **kwargs):
        self._client = _HttpJsonClient(base_url, **kwargs)

    def score(self, text: str) -> PerplexityScore:
        if not text.strip():
            raise EmptyText("cannot score empty text")
        reply = self._client.post("/v1/score", {"text": text})
        try:
            return PerplexityScore(
                mean_nll_per_token=float(reply["mean_nll_per_token"]),
                token_count=int(reply["token_count"]),
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise BackendMalformedReply(f"bad score reply: {exc}",
                                        payload=reply) from None
