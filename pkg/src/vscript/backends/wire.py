"""Reference server for the backend wire protocol.

Exposes any BackendSet over HTTP so the remote clients can be exercised
against a live implementation, and so the mock backends can stand in for an
externally hosted model during demos. Stdlib-only by design.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import EmptyText, VScriptError
from .base import BackendSet, GenerationRequest


class BackendWireServer:
    """Threaded HTTP server implementing /v1/{generate,classify,embed,score}."""

    def __init__(self, backends: BackendSet, host: str = "127.0.0.1", port: int = 0):
        self.backends = backends
        handler = _make_handler(backends)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "BackendWireServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self) -> "BackendWireServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(backends: BackendSet):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def do_POST(self):
            try:
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
            except (ValueError, json.JSONDecodeError):
                return self._reply(400, {"error": "invalid JSON body"})
            try:
                if self.path == "/v1/generate":
                    request = GenerationRequest(
                        prompt=payload["prompt"],
                        max_new_tokens=int(payload.get("max_new_tokens", 200)),
                        top_k=int(payload.get("top_k", 4)),
                        temperature=float(payload.get("temperature", 1.0)),
                        num_candidates=int(payload.get("num_candidates", 1)),
                        seed=int(payload.get("seed", 0)),
                        stop_marker=payload.get("stop_marker"),
                    )
                    return self._reply(
                        200, {"completions": backends.generator.generate(request)})
                if self.path == "/v1/classify":
                    dist = backends.classifier.classify(payload["text"])
                    return self._reply(
                        200, {"probs": {g.value: p for g, p in dist.probs.items()}})
                if self.path == "/v1/embed":
                    embeddings = backends.embedder.embed(list(payload["texts"]))
                    return self._reply(200, {"embeddings": [
                        {"dim": e.dim, "values": list(e.values)} for e in embeddings]})
                if self.path == "/v1/score":
                    score = backends.scorer.score(payload["text"])
                    return self._reply(200, {
                        "mean_nll_per_token": score.mean_nll_per_token,
                        "token_count": score.token_count,
                    })
            except (EmptyText, KeyError, TypeError, ValueError) as exc:
                return self._reply(400, {"error": str(exc)})
            except VScriptError as exc:
                return self._reply(502, {"error": str(exc)})
            self._reply(404, {"error": f"no such endpoint: {self.path}"})

        def _reply(self, status: int, body: dict):
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

    return Handler
