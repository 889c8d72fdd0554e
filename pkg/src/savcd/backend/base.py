from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np


class BackendError(RuntimeError):
    """Raised when a backend cannot serve a request.

    ``step`` is filled in by the decoder when the failure happens inside
    the generation loop.
    """

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step

    def __str__(self) -> str:
        msg = super().__str__()
        return msg if self.step is None else f"step {self.step}: {msg}"


class TransportError(BackendError):
    pass


class VocabMismatchError(BackendError):
    pass


class UnknownContextError(BackendError):
    pass


@dataclass
class BackendSession:
    session_id: str
    vocab_size: int
    end_token: int
    image_digest: Optional[str] = None
    context: list[int] = field(default_factory=list)

    def extend(self, tokens: Sequence[int]) -> None:
        """Record the latest context; only appending is allowed."""
        tokens = [int(t) for t in tokens]
        if tokens[: len(self.context)] != self.context:
            raise BackendError(f"session {self.session_id}: context is append-only")
        self.context = tokens


class Backend(Protocol):
    def open_session(self, image: Optional[np.ndarray]) -> BackendSession: ...

    def next_logits(self, session: BackendSession, tokens: Sequence[int]) -> np.ndarray: ...

    def generate_text(
        self, session: BackendSession, prompt: str, max_tokens: int, greedy: bool = True
    ) -> str: ...

    def close_session(self, session: BackendSession) -> None: ...


def image_digest(image: Optional[np.ndarray]) -> Optional[str]:
    """sha256 over shape and raw bytes of an h x w x 3 uint8 image."""
    if image is None:
        return None
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    h = hashlib.sha256()
    h.update(("%dx%dx%d:" % arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()
