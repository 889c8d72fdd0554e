"""Self-augmentation selection: ask the model which augmentation to contrast against.

The model sees a structured prompt (augmentation definitions, optional
reasoning instruction, optional few-shot examples) and answers with
``Reason: ...`` / ``Choice: ...`` lines, which :func:`parse_choice` splits.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .augment import AugmentationKind

QUERY_SLOT = "{text}"
DEFAULT_FALLBACK = AugmentationKind.NOISE

_REASON_INSTRUCTION = (
    " Provide a clear reason explaining why the augmentation is chosen, then state your final choice."
)
_FORMAT_BOTH = 'following the "Reason:" and "Choice:" format.'
_FORMAT_CHOICE = 'following the "Choice:" format.'
_EXAMPLES_HEADER = "## Examples ##\n"
_ANSWER_HEADER = "## Your Answer ##\n"


class TemplateId(str, enum.Enum):
    FULL = "full"
    NO_REASONING = "no-reasoning"
    NO_ICL = "no-icl"
    MINIMAL = "minimal"

    @property
    def has_reasoning(self) -> bool:
        return self in (TemplateId.FULL, TemplateId.NO_ICL)

    @property
    def has_examples(self) -> bool:
        return self in (TemplateId.FULL, TemplateId.NO_REASONING)

    @property
    def max_tokens(self) -> int:
        return 256 if self.has_reasoning else 16


@dataclass(frozen=True)
class SasPrompt:
    template_id: TemplateId
    rendered_text: str


@dataclass(frozen=True)
class SasOutcome:
    reason: str
    choice: AugmentationKind
    valid: bool
    raw_output: str


def _asset(name: str) -> str:
    return resources.files("savcd").joinpath("assets").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def template_text(template_id) -> str:
    """Unrendered template; the query goes where ``{text}`` stands."""
    template_id = TemplateId(template_id)
    text = _asset("sas_prompt_full.txt")
    if not template_id.has_examples:
        start = text.index(_EXAMPLES_HEADER)
        text = text[:start] + text[text.index(_ANSWER_HEADER):]
    if not template_id.has_reasoning:
        text = text.replace(_REASON_INSTRUCTION, " State your final choice.")
        text = text.replace(_FORMAT_BOTH, _FORMAT_CHOICE)
        text = "\n".join(line for line in text.split("\n") if not line.startswith("Reason:"))
    return text


def judge_prompt_text() -> str:
    return _asset("judge_prompt.txt")


def render_prompt(template_id, query: str) -> SasPrompt:
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    template_id = TemplateId(template_id)
    return SasPrompt(template_id, template_text(template_id).replace(QUERY_SLOT, query))


_SYNONYMS: dict[str, AugmentationKind] = {}
for _kind, _names in {
    AugmentationKind.VERTICAL_FLIP: ["vertical flip", "flip vertical", "vertical flipping", "vflip", "v flip",
                                     "vertical", "flip vertically", "upside down"],
    AugmentationKind.HORIZONTAL_FLIP: ["horizontal flip", "flip horizontal", "horizontal flipping", "hflip",
                                       "h flip", "horizontal", "flip horizontally"],
    AugmentationKind.COLOR_INVERSION: ["color inversion", "colour inversion", "color invert", "invert color",
                                       "invert colors", "inversion", "invert", "color inverted"],
    AugmentationKind.RANDOM_CROP: ["random crop", "random cropping", "crop", "cropping"],
    AugmentationKind.RANDOM_MASK: ["random mask", "random masking", "mask", "masking", "occlusion"],
    AugmentationKind.NOISE: ["noise", "noise addition", "add noise", "adding noise", "gaussian noise",
                             "diffusion noise", "random noise"],
}.items():
    for _name in _names:
        _SYNONYMS[_name] = _kind
# Longest names first so "random mask" is tried before "mask".
_SYNONYM_ORDER = sorted(_SYNONYMS, key=len, reverse=True)

_CHOICE_LINE = re.compile(r"^[ \t]*\**choice\**[ \t]*:", re.IGNORECASE | re.MULTILINE)
_CHOICE_INLINE = re.compile(r"\bchoice\**[ \t]*:", re.IGNORECASE)
_REASON = re.compile(r"\breason\**[ \t]*:", re.IGNORECASE)


def normalize_choice(text: str) -> str:
    s = text.strip().lower()
    s = re.sub(r"[_\-]", " ", s)
    s = re.sub(r"[\"'`*“”‘’.,;:!()\[\]]", " ", s)
    return " ".join(s.split())


def lookup_choice(text: str):
    norm = normalize_choice(text)
    if norm in _SYNONYMS:
        return _SYNONYMS[norm]
    for name in _SYNONYM_ORDER:
        if norm == name or norm.startswith(name + " "):
            return _SYNONYMS[name]
    return None


def parse_choice(raw: str, fallback=DEFAULT_FALLBACK) -> SasOutcome:
    """Split model output into ``(reason, choice)``; never raises.

    The last ``Choice:`` marker at the start of a line wins; failing that,
    the last inline one. Anything unparsable returns ``fallback`` with
    ``valid=False`` and the raw text as the reason.
    """
    fallback = AugmentationKind(fallback)
    raw = raw if isinstance(raw, str) else str(raw)
    failed = SasOutcome(raw, fallback, False, raw)
    try:
        marks = list(_CHOICE_LINE.finditer(raw)) or list(_CHOICE_INLINE.finditer(raw))
        if not marks:
            return failed
        m = marks[-1]
        rest = raw[m.end():]
        choice = lookup_choice(rest.split("\n", 1)[0])
        if choice is None:
            return failed
        head = raw[: m.start()]
        reasons = list(_REASON.finditer(head))
        reason = head[reasons[-1].end():] if reasons else head
        return SasOutcome(" ".join(reason.split()), choice, True, raw)
    except Exception:
        return failed


# Conventional name for the parser in the method description.
parse_g = parse_choice


def select_augmentation(backend, query: str, template_id=TemplateId.FULL, fallback=DEFAULT_FALLBACK) -> SasOutcome:
    """One greedy, text-only generation pass followed by :func:`parse_choice`."""
    prompt = render_prompt(template_id, query)
    session = backend.open_session(None)
    try:
        raw = backend.generate_text(session, prompt.rendered_text, prompt.template_id.max_tokens, greedy=True)
    finally:
        backend.close_session(session)
    return parse_choice(raw, fallback)
