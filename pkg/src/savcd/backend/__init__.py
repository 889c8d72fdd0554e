from .base import (
    Backend,
    BackendError,
    BackendSession,
    TransportError,
    UnknownContextError,
    VocabMismatchError,
    image_digest,
)
from .http import HttpBackend
from .synthetic import SyntheticBackend, SyntheticScript

__all__ = [
    "Backend",
    "BackendError",
    "BackendSession",
    "HttpBackend",
    "SyntheticBackend",
    "SyntheticScript",
    "TransportError",
    "UnknownContextError",
    "VocabMismatchError",
    "image_digest",
]
