"""HTTP facade for the interactive editor.

Routes (HTTP/1.1, JSON document bodies, PNG images):

    GET  /api/health
    GET  /api/metrics                     solver/render counters
    GET  /api/doc/{id}                    canonical document
    PUT  /api/doc/{id}                    store + validation report
    GET  /api/render/{id}?w=&h=&viewport=

Documents persist as files in the state directory, so sessions survive
restarts. Renders are cached per (document, size, viewport) and carry an
``X-Content-Hash`` header so clients can skip redraws. Renders of one
session serialize on a per-session lock ("latest wins" for scrubbing);
different sessions run fully parallel.

Viewport renders go through the retained base solve (render_zoom), so
zooming and panning never re-factorize.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import click
import numpy as np

from . import solver
from .model import (
    DocumentError,
    PvgDocument,
    has_errors,
    parse_document,
    serialize_document,
    validate,
)
from .render import RenderState, ZoomRequest, render_state, render_zoom

MAX_BODY = 10 * 1024 * 1024
_SESSION_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")

DEFAULT_DOC = PvgDocument(
    canvas_width=256, canvas_height=256, background=(1.0, 1.0, 1.0)
)


def _png_bytes(channels: np.ndarray) -> bytes:
    from PIL import Image

    q = np.floor(np.clip(channels, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(q, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


@dataclass
class Session:
    doc: PvgDocument
    diagnostics: list
    lock: threading.Lock = field(default_factory=threading.Lock)
    base_state: RenderState | None = None
    render_cache: dict = field(default_factory=dict)

    def doc_hash(self) -> str:
        return hashlib.sha256(serialize_document(self.doc)).hexdigest()


class SessionStore:
    def __init__(self, state_dir: str):
        self.state_dir = state_dir
        os.makedirs(state_dir, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.metrics = {"renders": 0, "cache_hits": 0}

    def _path(self, sid: str) -> str:
        return os.path.join(self.state_dir, f"{sid}.pvg.json")

    def get(self, sid: str, create: bool = False) -> Session | None:
        with self._lock:
            sess = self._sessions.get(sid)
            if sess is not None:
                return sess
            path = self._path(sid)
            if os.path.exists(path):
                with open(path, "rb") as fh:
                    doc = parse_document(fh.read())
                sess = Session(doc=doc, diagnostics=validate(doc))
                self._sessions[sid] = sess
                return sess
            if create:
                sess = Session(doc=DEFAULT_DOC, diagnostics=[])
                self._sessions[sid] = sess
                return sess
            return None

    def put(self, sid: str, doc: PvgDocument) -> Session:
        with self._lock:
            sess = self._sessions.get(sid)
            if sess is None:
                sess = Session(doc=doc, diagnostics=[])
                self._sessions[sid] = sess
        with sess.lock:
            sess.doc = doc
            sess.diagnostics = validate(doc)
            sess.base_state = None
            sess.render_cache.clear()  # any mutation invalidates the cache
            with open(self._path(sid), "wb") as fh:
                fh.write(serialize_document(doc))
        return sess


def _diag_json(diags) -> list[dict]:
    return [
        {
            "severity": d.severity,
            "code": d.code,
            "message": d.message,
            "primitive_index": d.primitive_index,
        }
        for d in diags
    ]


def make_handler(store: SessionStore):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            if os.environ.get("PVG_SERVICE_LOG"):
                super().log_message(fmt, *args)

        def _reply(self, code: int, body: bytes, ctype: str, extra=None):
            self.send_response(code)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            # the editor runs from file:// or another port; allow it
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Expose-Headers", "X-Content-Hash, X-Cache")
            for k, v in (extra or {}).items():
                self.send_header(k, v)
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, PUT, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def _json(self, code: int, obj, extra=None):
            self._reply(code, json.dumps(obj).encode(), "application/json", extra)

        def do_GET(self):
            url = urlparse(self.path)
            if url.path == "/api/health":
                self._json(200, {"status": "ok"})
                return
            if url.path == "/api/metrics":
                self._json(
                    200,
                    {
                        "factorizations": solver.factorization_count(),
                        **store.metrics,
                    },
                )
                return
            m = re.match(r"^/api/doc/([^/]+)$", url.path)
            if m:
                sid = m.group(1)
                if not _SESSION_RE.match(sid):
                    self._json(400, {"error": "bad session id"})
                    return
                sess = store.get(sid)
                if sess is None:
                    self._json(404, {"error": "unknown session"})
                    return
                self._reply(200, serialize_document(sess.doc), "application/json")
                return
            m = re.match(r"^/api/render/([^/]+)$", url.path)
            if m:
                self._render(m.group(1), parse_qs(url.query))
                return
            self._json(404, {"error": "not found"})

        def do_PUT(self):
            m = re.match(r"^/api/doc/([^/]+)$", urlparse(self.path).path)
            if not m:
                self._json(404, {"error": "not found"})
                return
            sid = m.group(1)
            if not _SESSION_RE.match(sid):
                self._json(400, {"error": "bad session id"})
                return
            length = int(self.headers.get("Content-Length", "0"))
            if length > MAX_BODY:
                self._json(413, {"error": "document too large"})
                return
            body = self.rfile.read(length)
            try:
                doc = parse_document(body)
            except DocumentError as exc:
                self._json(422, {"error": str(exc)})
                return
            sess = store.put(sid, doc)
            self._json(200, {"diagnostics": _diag_json(sess.diagnostics)})

        def _render(self, sid: str, query):
            if not _SESSION_RE.match(sid):
                self._json(400, {"error": "bad session id"})
                return
            sess = store.get(sid)
            if sess is None:
                self._json(404, {"error": "unknown session"})
                return
            if has_errors(sess.diagnostics):
                self._json(
                    409,
                    {
                        "error": "document has blocking errors",
                        "diagnostics": _diag_json(sess.diagnostics),
                    },
                )
                return
            try:
                w = int(query.get("w", [sess.doc.canvas_width])[0])
                h = int(query.get("h", [sess.doc.canvas_height])[0])
                if w <= 0 or h <= 0 or w * h > 16_000_000:
                    raise ValueError("bad size")
                viewport = None
                if "viewport" in query:
                    parts = [float(v) for v in query["viewport"][0].split(",")]
                    if len(parts) != 4:
                        raise ValueError("viewport expects x,y,w,h")
                    viewport = tuple(parts)
            except ValueError as exc:
                self._json(400, {"error": str(exc)})
                return

            key = (sess.doc_hash(), w, h, viewport)
            cached = sess.render_cache.get(key)
            if cached is not None:
                store.metrics["cache_hits"] += 1
                png, digest = cached
                self._reply(200, png, "image/png",
                            {"X-Content-Hash": digest, "X-Cache": "hit"})
                return

            with sess.lock:  # one in-flight render per session
                cached = sess.render_cache.get(key)
                if cached is None:
                    doc = sess.doc
                    try:
                        if viewport is None:
                            state = render_state(doc, w, h)
                            channels = state.image.channels
                            if (w, h) == (doc.canvas_width, doc.canvas_height):
                                sess.base_state = state
                        else:
                            if sess.base_state is None:
                                sess.base_state = render_state(
                                    doc, doc.canvas_width, doc.canvas_height
                                )
                            img = render_zoom(
                                sess.base_state, ZoomRequest(viewport, w, h)
                            )
                            channels = img.channels
                    except ValueError as exc:
                        self._json(400, {"error": str(exc)})
                        return
                    store.metrics["renders"] += 1
                    png = _png_bytes(channels)
                    digest = hashlib.sha256(png).hexdigest()
                    sess.render_cache[key] = (png, digest)
                else:
                    store.metrics["cache_hits"] += 1
                png, digest = sess.render_cache[key]
            self._reply(200, png, "image/png",
                        {"X-Content-Hash": digest, "X-Cache": "miss"})

    return Handler


def serve(port: int, state_dir: str):
    store = SessionStore(state_dir)
    server = ThreadingHTTPServer(("127.0.0.1", port), make_handler(store))
    return server


@click.command()
@click.option("--port", type=int, default=None, envvar="PVG_PORT")
@click.option("--state-dir", default="./pvg-sessions", show_default=True)
def main(port, state_dir):
    """Run the PVG render service."""
    port = port or 8765
    server = serve(port, state_dir)
    click.echo(f"pvg service on http://127.0.0.1:{port} (state: {state_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


if __name__ == "__main__":
    main()
