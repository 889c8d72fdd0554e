"""Deterministic scripted backend used for verification and demos.

A script is a JSON document::

    {
      "vocab_size": 6,
      "end_token": 5,
      "prompt_length": 2,
      "strict": false,
      "clean_image_sha256": "<digest>" | null,
      "prompt_tokens": [0, 1],
      "steps": [{"expert": [...], "amateur": [...]}, ...],
      "contexts": {"expert:0,1,3": [...], "amateur:0,1,3": [...]},
      "completions": {"<query>": "<completion text>"}
    }

A session is the *expert* when its image digest equals
``clean_image_sha256`` and the *amateur* otherwise. Context-keyed rows
(``"<role>:<comma-joined tokens>"``) win over step-indexed rows; the step
index is ``len(tokens) - prompt_length``.
"""
from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .base import (
    BackendError,
    BackendSession,
    UnknownContextError,
    image_digest,
)

END_BIAS = 10.0


@dataclass
class SyntheticScript:
    vocab_size: int
    end_token: int
    steps: list[dict] = field(default_factory=list)
    contexts: dict[str, list[float]] = field(default_factory=dict)
    completions: dict[str, str] = field(default_factory=dict)
    prompt_length: int = 1
    prompt_tokens: Optional[list[int]] = None
    clean_image_sha256: Optional[str] = None
    strict: bool = False

    def __post_init__(self):
        if self.vocab_size < 1 or not 0 <= self.end_token < self.vocab_size:
            raise ValueError("end_token must index into the vocabulary")
        for i, row in enumerate(self.steps):
            for role in ("expert", "amateur"):
                if role in row and len(row[role]) != self.vocab_size:
                    raise ValueError(f"step {i} {role} row has {len(row[role])} entries")
        for key, row in self.contexts.items():
            if len(row) != self.vocab_size:
                raise ValueError(f"context {key!r} row has {len(row)} entries")

    @classmethod
    def from_rows(cls, expert_rows, amateur_rows=None, *, clean_image=None, **kw) -> "SyntheticScript":
        amateur_rows = expert_rows if amateur_rows is None else amateur_rows
        steps = [
            {"expert": [float(x) for x in e], "amateur": [float(x) for x in a]}
            for e, a in zip(expert_rows, amateur_rows)
        ]
        vocab = len(steps[0]["expert"])
        kw.setdefault("end_token", vocab - 1)
        return cls(vocab_size=vocab, steps=steps, clean_image_sha256=image_digest(clean_image), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticScript":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def load(cls, path) -> "SyntheticScript":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def role(self, digest: Optional[str]) -> str:
        if digest is None:
            return "text"
        return "expert" if digest == self.clean_image_sha256 else "amateur"

    def row(self, digest: Optional[str], tokens: Sequence[int]) -> np.ndarray:
        role = self.role(digest)
        key = f"{role}:{','.join(str(int(t)) for t in tokens)}"
        if key in self.contexts:
            return np.array(self.contexts[key], dtype=np.float64)
        t = len(tokens) - self.prompt_length
        if 0 <= t < len(self.steps):
            step = self.steps[t]
            vec = step.get(role, step.get("expert"))
            if vec is not None:
                return np.array(vec, dtype=np.float64)
        if self.strict:
            raise UnknownContextError(f"no scripted row for {key}")
        # Past the script: emit a row that ends generation.
        row = np.zeros(self.vocab_size)
        row[self.end_token] = END_BIAS
        return row

    def completion(self, prompt: str) -> Optional[str]:
        if prompt in self.completions:
            return self.completions[prompt]
        # The key whose last occurrence sits furthest into the prompt wins, so a
        # query at the end of a few-shot prompt beats the shots before it.
        best, best_pos = None, -1
        for key, text in self.completions.items():
            pos = prompt.rfind(key)
            if key and pos >= 0 and (pos + len(key) > best_pos):
                best, best_pos = text, pos + len(key)
        return best


class SyntheticBackend:
    """In-process backend serving a :class:`SyntheticScript`."""

    def __init__(self, script: SyntheticScript):
        self.script = script
        self._sessions: dict[str, BackendSession] = {}
        self._ids = itertools.count()
        self._lock = threading.Lock()

    def open_session(self, image: Optional[np.ndarray]) -> BackendSession:
        with self._lock:
            sid = f"s{next(self._ids)}"
            session = BackendSession(
                session_id=sid,
                vocab_size=self.script.vocab_size,
                end_token=self.script.end_token,
                image_digest=image_digest(image),
            )
            self._sessions[sid] = session
        return session

    def get_session(self, session_id: str) -> BackendSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise BackendError(f"unknown session {session_id!r}") from None

    def next_logits(self, session: BackendSession, tokens: Sequence[int]) -> np.ndarray:
        if not len(tokens):
            raise BackendError("tokens must be non-empty")
        self.get_session(session.session_id)
        session.extend(tokens)
        return self.script.row(session.image_digest, tokens)

    def generate_text(self, session: BackendSession, prompt: str, max_tokens: int, greedy: bool = True) -> str:
        if not prompt:
            raise BackendError("prompt must be non-empty")
        self.get_session(session.session_id)
        text = self.script.completion(prompt)
        if text is None:
            if self.script.strict:
                raise UnknownContextError("no scripted completion for prompt")
            return ""
        words = text.split(" ")
        return " ".join(words[:max_tokens]) if len(words) > max_tokens else text

    def close_session(self, session: BackendSession) -> None:
        with self._lock:
            self._sessions.pop(session.session_id, None)
