"""Contrastive decoding with plausibility truncation.

Per step the decoder queries the clean-image (expert) and augmented-image
(amateur) sessions, combines them as ``(1 + alpha) * l - alpha * l'``,
builds a candidate set from the *expert* distribution, masks everything
outside it and samples the next token.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dist
from .backend.base import Backend, BackendError, VocabMismatchError


class ThresholdMode(str, enum.Enum):
    NONE = "none"
    APC = "apc"
    SAT = "sat"
    HNS = "hns"


class Sampling(str, enum.Enum):
    GREEDY = "greedy"
    MULTINOMIAL = "multinomial"


class StopReason(str, enum.Enum):
    MAX_TOKENS = "max_tokens"
    END_TOKEN = "end_token"


@dataclass(frozen=True)
class DecodingParams:
    alpha: float = 1.0
    beta: float = 0.1
    gamma: float = -0.5
    threshold_mode: ThresholdMode = ThresholdMode.SAT
    max_tokens: int = 64
    sampling: Sampling = Sampling.MULTINOMIAL
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "threshold_mode", ThresholdMode(self.threshold_mode))
        object.__setattr__(self, "sampling", Sampling(self.sampling))
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.threshold_mode is ThresholdMode.SAT and not self.gamma < 0:
            raise ValueError(f"SAT needs gamma < 0, got {self.gamma}")
        if self.threshold_mode is ThresholdMode.HNS and self.gamma == 0:
            raise ValueError("HNS needs a nonzero gamma")
        if int(self.max_tokens) < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class CandidateSet:
    members: frozenset
    threshold_used: float

    def __contains__(self, token) -> bool:
        return int(token) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)


@dataclass
class StepTrace:
    t: int
    expert_logits: np.ndarray
    amateur_logits: np.ndarray
    contrasted_logits: np.ndarray
    beta_t: float
    entropy_bits: float
    candidates: list[int]
    chosen_token: int

    @property
    def candidate_count(self) -> int:
        return len(self.candidates)


@dataclass
class DecodeResult:
    tokens: list[int]
    traces: list[StepTrace] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_TOKENS


def _filter(p: np.ndarray, threshold: float) -> CandidateSet:
    cutoff = threshold * p.max()
    members = frozenset(int(i) for i in np.flatnonzero(p >= cutoff))
    return CandidateSet(members, threshold)


def apc_candidates(p, beta: float) -> CandidateSet:
    """Tokens whose probability is at least ``beta`` times the maximum."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    return _filter(dist.check_probs(p), beta)


def sat_candidates(expert_logits, gamma: float) -> CandidateSet:
    """APC filter with the entropy-adaptive threshold ``h_decay(softmax(l), gamma)``."""
    p = dist.softmax(expert_logits)
    return _filter(p, dist.h_decay(p, gamma))


def hns_candidates(expert_logits, gamma: float) -> CandidateSet:
    p = dist.softmax(expert_logits)
    return _filter(p, dist.h_ns(p, gamma))


def contrast(l, l_prime, alpha: float) -> np.ndarray:
    l = np.asarray(l, dtype=np.float64)
    l_prime = np.asarray(l_prime, dtype=np.float64)
    if l.shape != l_prime.shape:
        raise VocabMismatchError(f"expert has {l.shape[-1]} logits, amateur has {l_prime.shape[-1]}")
    if not (np.isfinite(l).all() and np.isfinite(l_prime).all()):
        raise ValueError("contrast expects fully finite logits")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    # Same as (1 + alpha) * l - alpha * l', but exact when l' == l and monotone
    # in l under rounding.
    return l + alpha * (l - l_prime)


def mask_to_candidates(l_cd, cs: CandidateSet) -> np.ndarray:
    out = np.full(np.shape(l_cd), dist.MASK)
    idx = np.fromiter(cs.members, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("candidate set is empty")
    out[idx] = np.asarray(l_cd, dtype=np.float64)[idx]
    return out


def sample(l_final, mode: Sampling, rng: np.random.Generator) -> int:
    """Pick a token from ``softmax(l_final)``.

    Multinomial mode consumes exactly one ``rng.random()`` draw and inverts
    the CDF, so zero-probability (masked) tokens can never be returned.
    """
    if mode is not Sampling.MULTINOMIAL and Sampling(mode) is Sampling.GREEDY:
        return dist.argmax(l_final)
    arr = dist.check_logits(l_final)
    # Unnormalised CDF; masked entries add exactly 0 and so own an empty interval.
    cdf = np.exp(arr - arr.max()).cumsum()
    u = rng.random()
    i = int(cdf.searchsorted(u * cdf[-1], side="right"))
    if i >= cdf.size:  # u * total rounded up to total
        i = int(np.flatnonzero(arr > dist.MASK)[-1])
    return i


def select_candidates(expert_logits: np.ndarray, params: DecodingParams) -> CandidateSet:
    mode = params.threshold_mode
    if mode is ThresholdMode.SAT:
        return sat_candidates(expert_logits, params.gamma)
    if mode is ThresholdMode.APC:
        return apc_candidates(dist.softmax(expert_logits), params.beta)
    if mode is ThresholdMode.HNS:
        return hns_candidates(expert_logits, params.gamma)
    return CandidateSet(frozenset(range(len(expert_logits))), 0.0)


def _fetch(backend: Backend, session, tokens: list[int], t: int) -> np.ndarray:
    try:
        row = backend.next_logits(session, tokens)
    except BackendError as exc:
        exc.step = t
        raise
    except Exception as exc:
        raise BackendError(f"{type(exc).__name__}: {exc}", step=t) from exc
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (session.vocab_size,):
        raise VocabMismatchError(
            f"backend returned {row.size} logits, session declares {session.vocab_size}", step=t
        )
    if not np.isfinite(row).all():
        raise BackendError("backend returned non-finite logits", step=t)
    return row


def decode(
    backend: Backend,
    image: np.ndarray,
    augmented_image: np.ndarray,
    prompt_tokens: Sequence[int],
    params: Optional[DecodingParams] = None,
    trace_sink=None,
) -> DecodeResult:
    """Run the contrastive decoding loop.

    Two sessions are opened, one bound to ``image`` and one to
    ``augmented_image``; both are closed on exit. ``trace_sink``, if given,
    is called with every ``StepTrace`` as it is produced.
    """
    params = params or DecodingParams()
    if np.shape(image) != np.shape(augmented_image):
        raise ValueError("clean and augmented images must share dimensions")
    prompt = [int(t) for t in prompt_tokens]
    if not prompt:
        raise ValueError("prompt_tokens must be non-empty")

    try:
        expert = backend.open_session(image)
        amateur = backend.open_session(augmented_image)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"{type(exc).__name__}: {exc}", step=0) from exc
    if expert.vocab_size != amateur.vocab_size:
        raise VocabMismatchError("expert and amateur sessions disagree on vocab size")

    rng = np.random.Generator(np.random.PCG64(int(params.seed)))
    result = DecodeResult(tokens=[])
    try:
        for t in range(params.max_tokens):
            context = prompt + result.tokens
            l = _fetch(backend, expert, context, t)
            l_prime = _fetch(backend, amateur, context, t)
            l_cd = contrast(l, l_prime, params.alpha)
            p_expert = dist.softmax(l)
            cs = select_candidates(l, params)
            y = sample(mask_to_candidates(l_cd, cs), params.sampling, rng)
            step = StepTrace(
                t=t,
                expert_logits=l,
                amateur_logits=l_prime,
                contrasted_logits=l_cd,
                beta_t=float(cs.threshold_used),
                entropy_bits=dist.entropy_bits(p_expert),
                candidates=cs.sorted(),
                chosen_token=y,
            )
            result.tokens.append(y)
            result.traces.append(step)
            if trace_sink is not None:
                trace_sink(step)
            if y == expert.end_token:
                result.stop_reason = StopReason.END_TOKEN
                break
    finally:
        for s in (expert, amateur):
            try:
                backend.close_session(s)
            except Exception:
                pass
    return result


def greedy_decode(backend: Backend, image, prompt_tokens, max_tokens: int) -> list[int]:
    """Plain greedy decoding on one session, without contrast or truncation."""
    session = backend.open_session(image)
    out: list[int] = []
    try:
        for t in range(max_tokens):
            y = dist.argmax(_fetch(backend, session, list(prompt_tokens) + out, t))
            out.append(y)
            if y == session.end_token:
                break
    finally:
        backend.close_session(session)
    return out


def top_k(logits: np.ndarray, k: int = 5) -> list[list]:
    """``[[index, value], ...]`` for the k largest finite entries, ties by index."""
    arr = np.asarray(logits, dtype=np.float64)
    order = np.lexsort((np.arange(arr.size), -arr))
    return [[int(i), float(arr[i])] for i in order[:k] if math.isfinite(arr[i])]
