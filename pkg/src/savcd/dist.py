"""Primitives over logit and probability vectors.

All functions take 1-D float arrays. Logit vectors may hold ``-inf`` as the
mask sentinel; ``+inf`` and NaN are rejected. Entropies are in bits.
"""
from __future__ import annotations

import math

import numpy as np

MASK = -np.inf
HNS_FLOOR = 1e-6


def check_logits(logits) -> np.ndarray:
    """Validate a logit vector and return it as a float64 array."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"logits must be a non-empty 1-D vector, got shape {arr.shape}")
    # max() propagates NaN, so one reduction catches NaN, +inf and all-masked input.
    top = arr.max()
    if not top < np.inf:
        raise ValueError("logits may not contain NaN or +inf")
    if top == -np.inf:
        raise ValueError("logits are fully masked")
    return arr


def check_probs(probs, atol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"probabilities must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.isfinite(arr).all() or (arr < 0).any() or (arr > 1).any():
        raise ValueError("probabilities must lie in [0, 1]")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"probabilities sum to {arr.sum()!r}, not 1")
    return arr


def softmax(logits) -> np.ndarray:
    """Max-shifted softmax; masked entries come out exactly 0."""
    arr = check_logits(logits)
    e = np.exp(arr - arr.max())
    return e / e.sum()


def entropy_bits(probs) -> float:
    """Shannon entropy in bits, skipping zero-mass entries (0 log 0 = 0)."""
    p = check_probs(probs)
    nz = p[p > 0]
    h = float(-(nz * np.log2(nz)).sum())
    # Rounding can push a one-hot slightly negative, or a uniform slightly above log2|V|.
    return min(max(h, 0.0), math.log2(p.size))


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def h_decay(probs, gamma: float) -> float:
    """Inverse-entropy threshold ``sigmoid(gamma * H(p))`` with ``gamma < 0``.

    Lies in (0, 0.5]; equals 0.5 exactly at zero entropy and falls as the
    distribution spreads out.
    """
    if not gamma < 0:
        raise ValueError(f"gamma must be strictly negative, got {gamma}")
    return sigmoid(gamma * entropy_bits(probs))


def h_ns(probs, gamma: float) -> float:
    """Normalized scaled entropy ``(H(p) / log2|V|) ** (1 / gamma)``, clamped to [1e-6, 1].

    Only used as an ablation comparator. For negative gamma the raw value is
    >= 1 everywhere (and diverges at zero entropy), so the clamp pins it to 1.
    """
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    p = check_probs(probs)
    if p.size < 2:
        return 1.0
    ratio = entropy_bits(p) / math.log2(p.size)
    if ratio <= 0.0:
        raw = math.inf if gamma < 0 else 0.0
    else:
        try:
            raw = ratio ** (1.0 / gamma)
        except OverflowError:
            raw = math.inf
    return min(max(raw, HNS_FLOOR), 1.0)


def argmax(logits) -> int:
    """Index of the largest finite score; ties go to the lowest index."""
    arr = check_logits(logits)
    return int(np.argmax(arr))
