"""HTTP client for logit servers speaking the ``/v1`` protocol."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import requests

from . import wire
from .base import BackendError, BackendSession, TransportError, image_digest


class HttpBackend:
    def __init__(self, base_url: str, timeout: float = 30.0, session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = session or requests.Session()

    def _call(self, method: str, path: str, kind_in: Optional[str], body: Optional[dict], kind_out: Optional[str]):
        data = wire.encode(kind_in, body) if kind_in else None
        try:
            resp = self._http.request(
                method,
                self.base_url + path,
                data=data,
                headers={"Content-Type": "application/json"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"{method} {path}: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            try:
                msg = wire.decode("error", resp.content)["error"]
            except wire.WireError:
                msg = resp.text[:200]
            raise TransportError(f"{method} {path}: HTTP {resp.status_code}: {msg}")
        if kind_out is None:
            return None
        try:
            return wire.decode(kind_out, resp.content)
        except wire.WireError as exc:
            raise TransportError(f"{method} {path}: {exc}") from exc

    def open_session(self, image: Optional[np.ndarray]) -> BackendSession:
        out = self._call(
            "POST", "/v1/session", "session_request",
            {"image_png_b64": wire.image_to_b64(image)}, "session_response",
        )
        return BackendSession(
            session_id=out["session_id"],
            vocab_size=out["vocab_size"],
            end_token=out["end_token"],
            image_digest=image_digest(image),
        )

    def next_logits(self, session: BackendSession, tokens: Sequence[int]) -> np.ndarray:
        tokens = [int(t) for t in tokens]
        out = self._call(
            "POST", "/v1/logits", "logits_request",
            {"session_id": session.session_id, "tokens": tokens}, "logits_response",
        )
        logits = np.asarray(out["logits"], dtype=np.float64)
        if logits.shape != (session.vocab_size,):
            raise BackendError(f"server sent {logits.size} logits, session declares {session.vocab_size}")
        session.extend(tokens)
        return logits

    def generate_text(self, session: BackendSession, prompt: str, max_tokens: int, greedy: bool = True) -> str:
        out = self._call(
            "POST", "/v1/generate", "generate_request",
            {"session_id": session.session_id, "prompt": prompt, "max_tokens": int(max_tokens), "greedy": bool(greedy)},
            "generate_response",
        )
        return out["text"]

    def close_session(self, session: BackendSession) -> None:
        self._call("DELETE", f"/v1/session/{session.session_id}", None, None, None)
