"""Threaded stub server exposing a synthetic script over the ``/v1`` protocol.

Run directly with ``python -m savcd.backend.stub_server SCRIPT.json --port 8765``.
"""
from __future__ import annotations

import argparse
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from . import wire
from .base import BackendError
from .synthetic import SyntheticBackend, SyntheticScript

log = logging.getLogger(__name__)


class _Handler(BaseHTTPRequestHandler):
    server: "StubServer"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: Optional[bytes] = None):
        self.send_response(status)
        if body is None:
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str):
        self._send(status, wire.encode("error", {"error": message}))

    def _body(self) -> bytes:
        n = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(n)

    def do_POST(self):
        backend = self.server.backend
        try:
            if self.path == "/v1/session":
                req = wire.decode("session_request", self._body())
                s = backend.open_session(wire.image_from_b64(req["image_png_b64"]))
                out = {"vocab_size": s.vocab_size, "end_token": s.end_token, "session_id": s.session_id}
                self._send(200, wire.encode("session_response", out))
            elif self.path == "/v1/logits":
                req = wire.decode("logits_request", self._body())
                s = backend.get_session(req["session_id"])
                row = backend.next_logits(s, req["tokens"])
                self._send(200, wire.encode("logits_response", {"logits": wire.logits_to_wire(row)}))
            elif self.path == "/v1/generate":
                req = wire.decode("generate_request", self._body())
                s = backend.get_session(req["session_id"])
                text = backend.generate_text(s, req["prompt"], req["max_tokens"], req["greedy"])
                self._send(200, wire.encode("generate_response", {"text": text}))
            else:
                self._error(404, f"no route {self.path}")
        except wire.WireError as exc:
            self._error(400, str(exc))
        except BackendError as exc:
            status = 404 if "unknown session" in str(exc) else 422
            self._error(status, str(exc))

    def do_DELETE(self):
        prefix = "/v1/session/"
        if not self.path.startswith(prefix):
            return self._error(404, f"no route {self.path}")
        sid = self.path[len(prefix):]
        backend = self.server.backend
        try:
            backend.close_session(backend.get_session(sid))
        except BackendError as exc:
            return self._error(404, str(exc))
        self._send(204)


class StubServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, script: SyntheticScript, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.backend = SyntheticBackend(script)
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("script")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO)
    server = StubServer(SyntheticScript.load(args.script), args.host, args.port)
    log.info("serving %s on %s", args.script, server.url)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
