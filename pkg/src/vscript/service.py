"""HTTP API around the Engine, plus static hosting for the browser UI.

Long-poll contract: POST /v1/sessions returns an id immediately and runs the
pipeline in a background thread; clients poll GET /v1/sessions/{id} until the
status leaves pending/running. Steering executes within its own request;
rapid steers serialise on the per-session write lock.

Endpoints:
    POST /v1/sessions                    {genre, starting_words, seed?} -> {id, status}
    GET  /v1/sessions/{id}               full session view
    POST /v1/sessions/{id}/steer         {genre?, words?} -> updated view
    GET  /v1/sessions/{id}/script        rendered script, text/plain
    GET  /v1/sessions/{id}/presentation  ordered clip references + music

Errors use status 400/404/502 with a JSON body {error, stage}.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .domain import Genre, render_script
from .errors import (
    BackendMalformedReply,
    BackendUnavailable,
    InvalidSteer,
    UnknownSession,
    VScriptError,
)
from .orchestrator import Engine

logger = logging.getLogger(__name__)

_SESSION_PATH = re.compile(r"^/v1/sessions/(?P<id>[A-Za-z0-9_-]+)"
                           r"(?P<tail>/script|/presentation|/steer)?$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".map": "application/json; charset=utf-8",
}


class _ApiError(Exception):
    def __init__(self, status: int, message: str, stage: str):
        super().__init__(message)
        self.status = status
        self.stage = stage


def _to_api_error(exc: Exception, stage: str) -> _ApiError:
    if isinstance(exc, UnknownSession):
        return _ApiError(404, f"unknown session: {exc}", stage)
    if isinstance(exc, (BackendUnavailable, BackendMalformedReply)):
        return _ApiError(502, str(exc), stage)
    if isinstance(exc, (InvalidSteer, ValueError)):
        return _ApiError(400, str(exc), stage)
    if isinstance(exc, VScriptError):
        return _ApiError(400, str(exc), stage)
    raise exc


class ApiServer:
    """Threaded stdlib HTTP server wrapping one Engine."""

    def __init__(self, engine: Engine, host: str = "127.0.0.1", port: int = 0,
                 ui_dir: str | Path | None = None):
        self.engine = engine
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        handler = _make_handler(engine, self.ui_dir)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ApiServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self) -> "ApiServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(engine: Engine, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            logger.debug("http: " + fmt, *args)

        # -- plumbing --

        def _json_body(self) -> dict:
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                body = json.loads(raw or b"{}")
            except json.JSONDecodeError:
                raise _ApiError(400, "request body is not valid JSON", "request")
            if not isinstance(body, dict):
                raise _ApiError(400, "request body must be a JSON object", "request")
            return body

        def _send_json(self, status: int, payload: dict) -> None:
            data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _send_text(self, status: int, text: str) -> None:
            data = text.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _send_error_json(self, err: _ApiError) -> None:
            self._send_json(err.status, {"error": str(err), "stage": err.stage})

        # -- routes --

        def do_POST(self):
            try:
                if self.path == "/v1/sessions":
                    return self._create_session()
                match = _SESSION_PATH.match(self.path)
                if match and match.group("tail") == "/steer":
                    return self._steer(match.group("id"))
                raise _ApiError(404, f"no such endpoint: {self.path}", "request")
            except _ApiError as err:
                self._send_error_json(err)

        def do_GET(self):
            try:
                match = _SESSION_PATH.match(self.path)
                if match:
                    session_id, tail = match.group("id"), match.group("tail")
                    if tail == "/script":
                        return self._script(session_id)
                    if tail == "/presentation":
                        return self._presentation(session_id)
                    if tail is None:
                        return self._view(session_id)
                if ui_dir is not None and not self.path.startswith("/v1/"):
                    return self._static()
                raise _ApiError(404, f"no such endpoint: {self.path}", "request")
            except _ApiError as err:
                self._send_error_json(err)

        # -- handlers --

        def _create_session(self):
            body = self._json_body()
            try:
                genre = Genre.parse(str(body.get("genre", "")))
            except ValueError as exc:
                raise _ApiError(400, str(exc), "request")
            words = str(body.get("starting_words", ""))
            if not words.strip():
                raise _ApiError(400, "starting_words must be non-empty", "request")
            seed = body.get("seed")
            try:
                session = engine.new_session(genre, words,
                                             int(seed) if seed is not None else None)
            except (ValueError, VScriptError) as exc:
                raise _to_api_error(exc, "request")
            threading.Thread(target=engine.execute, args=(session.id,),
                             daemon=True).start()
            self._send_json(200, {"id": session.id, "status": session.status})

        def _steer(self, session_id: str):
            body = self._json_body()
            genre = None
            if body.get("genre"):
                try:
                    genre = Genre.parse(str(body["genre"]))
                except ValueError as exc:
                    raise _ApiError(400, str(exc), "request")
            words = body.get("words")
            try:
                session = engine.steer_session(session_id, new_genre=genre,
                                               injected_words=words)
            except Exception as exc:  # mapped below
                raise _to_api_error(exc, "steer")
            self._send_json(200, engine.session_view(session.id))

        def _view(self, session_id: str):
            try:
                view = engine.session_view(session_id)
            except Exception as exc:
                raise _to_api_error(exc, "view")
            self._send_json(200, view)

        def _script(self, session_id: str):
            try:
                session = engine.get_session(session_id)
            except Exception as exc:
                raise _to_api_error(exc, "script")
            text = render_script(session.script) if session.script else ""
            self._send_text(200, text)

        def _presentation(self, session_id: str):
            try:
                payload = engine.get_presentation(session_id)
            except Exception as exc:
                raise _to_api_error(exc, "presentation")
            self._send_json(200, payload)

        def _static(self):
            rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
            target = (ui_dir / rel).resolve()
            if not str(target).startswith(str(ui_dir)) or not target.is_file():
                raise _ApiError(404, f"not found: {self.path}", "static")
            data = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

    return Handler
