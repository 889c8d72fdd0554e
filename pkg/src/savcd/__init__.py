"""Self-augmented visual contrastive decoding.

Query-aware augmentation selection, expert/amateur logit contrast, and
entropy-adaptive candidate truncation over any logit-serving backend.
"""
from .augment import AugmentationKind
from .dist import argmax, entropy_bits, h_decay, h_ns, softmax
from .engine import (
    CandidateSet,
    DecodeResult,
    DecodingParams,
    Sampling,
    StepTrace,
    ThresholdMode,
    apc_candidates,
    contrast,
    decode,
    mask_to_candidates,
    sample,
    sat_candidates,
)
from .sas import SasOutcome, TemplateId, parse_g, render_prompt, select_augmentation

__version__ = "0.1.0"
