"""Experiment harness: full pipeline runs, JSONL traces, ablation grids."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import augment, sas
from .augment import AugmentationKind
from .backend import Backend, HttpBackend, SyntheticBackend, SyntheticScript, image_digest
from .engine import DecodeResult, DecodingParams, Sampling, StepTrace, ThresholdMode, decode, top_k

TRACE_KEYS = (
    "t", "beta_t", "entropy_bits", "candidates", "chosen",
    "expert_top5", "amateur_top5", "contrasted_top5",
)
ABLATION_COLUMNS = ("mode", "gamma", "mean_beta_t", "mean_candidates", "exact_match_rate")


def asset_path(name: str):
    return resources.files("savcd").joinpath("assets").joinpath(name)


def trace_record(step: StepTrace) -> dict:
    return {
        "t": step.t,
        "beta_t": float(step.beta_t),
        "entropy_bits": float(step.entropy_bits),
        "candidates": [int(i) for i in step.candidates],
        "chosen": int(step.chosen_token),
        "expert_top5": top_k(step.expert_logits),
        "amateur_top5": top_k(step.amateur_logits),
        "contrasted_top5": top_k(step.contrasted_logits),
    }


def trace_line(step: StepTrace) -> str:
    return json.dumps(trace_record(step), allow_nan=False) + "\n"


@dataclass
class RunConfig:
    query: str
    image_path: Optional[str] = None
    script_path: Optional[str] = None
    backend_url: Optional[str] = None
    params: DecodingParams = field(default_factory=DecodingParams)
    use_sas: bool = True
    sas_template: sas.TemplateId = sas.TemplateId.FULL
    augmentation: Optional[AugmentationKind] = None
    prompt_tokens: Optional[list[int]] = None
    trace_path: Optional[str] = None

    def __post_init__(self):
        if (self.script_path is None) == (self.backend_url is None):
            raise ValueError("exactly one of script_path / backend_url is required")
        if not self.query:
            raise ValueError("query must be non-empty")
        self.sas_template = sas.TemplateId(self.sas_template)
        if self.augmentation is not None:
            self.augmentation = AugmentationKind(self.augmentation)


@dataclass
class RunSummary:
    augmentation: str
    sas_valid: Optional[bool]
    tokens: list[int]
    token_count: int
    stop_reason: str
    mean_candidates: float
    mean_beta_t: float
    entropy_series: list[float]
    duration_s: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def summarize(result: DecodeResult, augmentation: AugmentationKind, sas_valid, duration: float) -> RunSummary:
    n = len(result.traces)
    return RunSummary(
        augmentation=augmentation.value,
        sas_valid=sas_valid,
        tokens=list(result.tokens),
        token_count=len(result.tokens),
        stop_reason=result.stop_reason.value,
        mean_candidates=float(np.mean([s.candidate_count for s in result.traces])) if n else 0.0,
        mean_beta_t=float(np.mean([s.beta_t for s in result.traces])) if n else 0.0,
        entropy_series=[float(s.entropy_bits) for s in result.traces],
        duration_s=duration,
    )


def make_backend(config: RunConfig) -> tuple[Backend, Optional[SyntheticScript]]:
    if config.script_path is not None:
        script = SyntheticScript.load(config.script_path)
        return SyntheticBackend(script), script
    return HttpBackend(config.backend_url), None


def resolve_prompt_tokens(config: RunConfig, backend: Backend, script: Optional[SyntheticScript]) -> list[int]:
    """Explicit tokens, else the script's, else UTF-8 bytes of the query folded into the vocabulary."""
    if config.prompt_tokens:
        return list(config.prompt_tokens)
    if script is not None and script.prompt_tokens:
        return list(script.prompt_tokens)
    session = backend.open_session(None)
    try:
        vocab = session.vocab_size
    finally:
        backend.close_session(session)
    return [b % vocab for b in config.query.encode("utf-8")]


def run_pipeline(config: RunConfig, image: np.ndarray, backend: Optional[Backend] = None) -> tuple[RunSummary, DecodeResult]:
    """Selection pass, augmentation, then contrastive decoding.

    With ``use_sas`` the configured ``augmentation`` acts as the parser
    fallback; without it, it is used as is (default: noise).
    """
    script = None
    if backend is None:
        backend, script = make_backend(config)
    start = time.perf_counter()
    image = augment.as_raster(image)
    if config.use_sas:
        fallback = config.augmentation or sas.DEFAULT_FALLBACK
        outcome = sas.select_augmentation(backend, config.query, config.sas_template, fallback)
        kind, sas_valid = outcome.choice, outcome.valid
    else:
        kind, sas_valid = config.augmentation or AugmentationKind.NOISE, None
    augmented = augment.apply(kind, image, seed=config.params.seed)
    prompt = resolve_prompt_tokens(config, backend, script)

    sink, fh = None, None
    if config.trace_path:
        fh = open(config.trace_path, "w", encoding="utf-8", newline="\n")
        sink = lambda step: fh.write(trace_line(step))  # noqa: E731
    try:
        result = decode(backend, image, augmented, prompt, config.params, trace_sink=sink)
    finally:
        if fh is not None:
            fh.close()
    return summarize(result, kind, sas_valid, time.perf_counter() - start), result


# -- benchmark suite and ablation -------------------------------------------------


@dataclass
class SuiteCase:
    name: str
    script: SyntheticScript
    ground_truth: list[int]


SUITE_IMAGE = np.full((8, 8, 3), 96, dtype=np.uint8)


def load_suite(path=None) -> list[SuiteCase]:
    """Load a benchmark suite; defaults to the bundled hallucination-injection suite.

    Every case is served against :data:`SUITE_IMAGE` as the clean view.
    """
    src = Path(path) if path is not None else asset_path("hallucination_suite.json")
    doc = json.loads(src.read_text(encoding="utf-8"))
    digest = image_digest(SUITE_IMAGE)
    cases = []
    for c in doc["cases"]:
        script = SyntheticScript(
            vocab_size=doc["vocab_size"],
            end_token=doc["end_token"],
            steps=c["steps"],
            prompt_length=len(doc["prompt_tokens"]),
            prompt_tokens=doc["prompt_tokens"],
            clean_image_sha256=digest,
            strict=True,
        )
        cases.append(SuiteCase(c["name"], script, list(c["ground_truth"])))
    return cases


@dataclass(frozen=True)
class GridCell:
    mode: ThresholdMode
    gamma: Optional[float] = None
    beta: Optional[float] = None

    def params(self, base: DecodingParams) -> DecodingParams:
        kw = dict(base.__dict__)
        kw["threshold_mode"] = self.mode
        if self.gamma is not None:
            kw["gamma"] = self.gamma
        if self.beta is not None:
            kw["beta"] = self.beta
        return DecodingParams(**kw)


def run_cell(cell: GridCell, suite: Sequence[SuiteCase], base: DecodingParams) -> dict:
    params = cell.params(base)
    augmented = augment.color_inversion(SUITE_IMAGE)
    betas, sizes, hits = [], [], 0
    for case in suite:
        result = decode(SyntheticBackend(case.script), SUITE_IMAGE, augmented, case.script.prompt_tokens, params)
        betas += [s.beta_t for s in result.traces]
        sizes += [s.candidate_count for s in result.traces]
        hits += result.tokens == case.ground_truth
    show_gamma = cell.mode in (ThresholdMode.SAT, ThresholdMode.HNS)
    return {
        "mode": cell.mode.value,
        "gamma": params.gamma if show_gamma else "",
        "mean_beta_t": float(np.mean(betas)),
        "mean_candidates": float(np.mean(sizes)),
        "exact_match_rate": hits / len(suite),
    }


def run_ablation(cells: Iterable[GridCell], suite: Sequence[SuiteCase], base: Optional[DecodingParams] = None,
                 workers: int = 1) -> list[dict]:
    """One row per cell, in grid order regardless of completion order."""
    base = base or DecodingParams(sampling=Sampling.GREEDY)
    cells = list(cells)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda c: run_cell(c, suite, base), cells))
    return [run_cell(c, suite, base) for c in cells]


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ABLATION_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def parse_grid(doc: dict) -> list[GridCell]:
    """Grid documents list cells explicitly or as a mode x gamma x beta product.

    ``{"cells": [{"mode": "sat", "gamma": -0.5}, ...]}`` or
    ``{"modes": ["sat", "hns"], "gammas": [-0.1, -0.5], "betas": [0.1]}``.
    """
    if "cells" in doc:
        return [GridCell(ThresholdMode(c["mode"]), c.get("gamma"), c.get("beta")) for c in doc["cells"]]
    cells = []
    for mode in doc.get("modes", ["sat"]):
        mode = ThresholdMode(mode)
        if mode in (ThresholdMode.SAT, ThresholdMode.HNS):
            cells += [GridCell(mode, gamma=float(g)) for g in doc.get("gammas", [-0.5])]
        elif mode is ThresholdMode.APC:
            cells += [GridCell(mode, beta=float(b)) for b in doc.get("betas", [0.1])]
        else:
            cells.append(GridCell(mode))
    return cells
