"""JSON message bodies for the logit-server protocol.

Endpoints::

    POST   /v1/session        {"image_png_b64": str|null}
                              -> {"vocab_size", "end_token", "session_id"}
    POST   /v1/logits         {"session_id", "tokens"} -> {"logits"}
    POST   /v1/generate       {"session_id", "prompt", "max_tokens", "greedy"} -> {"text"}
    DELETE /v1/session/{id}   -> 204

Errors are any non-2xx status with body ``{"error": str}``.
"""
from __future__ import annotations

import base64
import io
import json
import math
from typing import Any, Optional

import numpy as np
from PIL import Image

MESSAGE_FIELDS: dict[str, dict[str, tuple]] = {
    "session_request": {"image_png_b64": (str, type(None))},
    "session_response": {"vocab_size": (int,), "end_token": (int,), "session_id": (str,)},
    "logits_request": {"session_id": (str,), "tokens": (list,)},
    "logits_response": {"logits": (list,)},
    "generate_request": {"session_id": (str,), "prompt": (str,), "max_tokens": (int,), "greedy": (bool,)},
    "generate_response": {"text": (str,)},
    "error": {"error": (str,)},
}


class WireError(ValueError):
    pass


def validate(kind: str, msg: Any) -> dict:
    """Check ``msg`` has exactly the fields of ``kind`` with the right JSON types."""
    fields = MESSAGE_FIELDS[kind]
    if not isinstance(msg, dict):
        raise WireError(f"{kind}: expected an object")
    if set(msg) != set(fields):
        raise WireError(f"{kind}: fields {sorted(msg)} != {sorted(fields)}")
    for name, types in fields.items():
        value = msg[name]
        # bool is a subclass of int in Python; keep them apart on the wire.
        if isinstance(value, bool) and bool not in types:
            raise WireError(f"{kind}.{name}: unexpected boolean")
        if not isinstance(value, types):
            raise WireError(f"{kind}.{name}: bad type {type(value).__name__}")
    if kind == "logits_request":
        if not all(isinstance(t, int) and not isinstance(t, bool) for t in msg["tokens"]):
            raise WireError("logits_request.tokens must be integers")
    if kind == "logits_response":
        for x in msg["logits"]:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise WireError("logits_response.logits must be finite numbers")
    return msg


def encode(kind: str, msg: dict) -> bytes:
    validate(kind, msg)
    return json.dumps(msg, allow_nan=False, separators=(",", ":")).encode("utf-8")


def decode(kind: str, body: bytes) -> dict:
    try:
        msg = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WireError(f"{kind}: malformed JSON: {exc}") from exc
    return validate(kind, msg)


def image_to_b64(image: Optional[np.ndarray]) -> Optional[str]:
    if image is None:
        return None
    buf = io.BytesIO()
    Image.fromarray(np.asarray(image, dtype=np.uint8), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def image_from_b64(data: Optional[str]) -> Optional[np.ndarray]:
    if data is None:
        return None
    try:
        raw = base64.b64decode(data, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise WireError(f"image_png_b64 is not a base64 PNG: {exc}") from exc


def logits_to_wire(logits) -> list[float]:
    return [float(x) for x in np.asarray(logits, dtype=np.float64)]
