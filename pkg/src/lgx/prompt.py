"""Prompt synthesis for the seven template variants and reply parsing."""
from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .perception import DIRECTIONS, CaptionSet, DetectionSet


class PromptVariant(str, Enum):
    ROBOT = "Robot"
    I = "I"
    THIRD_PERSON = "ThirdPerson"
    O_FIRST = "OFirst"
    GET_CLOSEST = "GetClosest"
    ONE_WORD_FIRST = "OneWordFirst"
    BLIP = "Blip"

    @property
    def uses_captions(self) -> bool:
        return self is PromptVariant.BLIP


@lru_cache(maxsize=None)
def templates() -> dict[str, str]:
    text = resources.files("lgx").joinpath("resources/templates.json").read_text()
    return json.loads(text)


def synthesize(variant: PromptVariant | str, target: str, context: DetectionSet | CaptionSet) -> str:
    variant = PromptVariant(variant)
    tmpl = string.Template(templates()[variant.value])
    if variant.uses_captions:
        if not isinstance(context, CaptionSet):
            raise TypeError("the Blip variant needs a CaptionSet")
        return tmpl.substitute(target=target, front=context.front, right=context.right,
                               behind=context.behind, left=context.left)
    if not isinstance(context, DetectionSet):
        raise TypeError(f"the {variant.value} variant needs a DetectionSet")
    if not context.labels:
        raise ValueError("cannot build an object prompt from an empty DetectionSet")
    return tmpl.substitute(target=target, objects=", ".join(context.labels))


@dataclass(frozen=True)
class LlmDecision:
    raw: str
    choice: str | None = None
    kind: str = "object"  # "object" or "direction"

    @property
    def valid(self) -> bool:
        return self.choice is not None


_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _normalize(text: str) -> str:
    return " ".join(_tokens(text))


def parse_response(raw: str, valid_set: list[str], kind: str | None = None) -> LlmDecision:
    """Map a free-text reply onto one member of ``valid_set``.

    Exact match after lower-casing and stripping punctuation wins.
    Otherwise the reply must contain exactly one member as a contiguous
    token run; members nested inside a longer matched member are ignored,
    so "spray bottle" does not also count as "bottle".
    """
    if not valid_set:
        raise ValueError("valid_set must be non-empty")
    if kind is None:
        kind = "direction" if set(valid_set) <= set(DIRECTIONS) else "object"
    norm = _normalize(raw or "")
    for member in valid_set:
        if _normalize(member) == norm and norm:
            return LlmDecision(raw, member, kind)

    toks = _tokens(raw or "")
    spans: list[tuple[int, int, str]] = []
    for member in valid_set:
        mt = _tokens(member)
        if not mt:
            continue
        for i in range(len(toks) - len(mt) + 1):
            if toks[i:i + len(mt)] == mt:
                spans.append((i, i + len(mt), member))
    kept = {
        m for (a, b, m) in spans
        if not any(a2 <= a and b <= b2 and (b2 - a2) > (b - a) for (a2, b2, _) in spans)
    }
    if len(kept) == 1:
        return LlmDecision(raw, kept.pop(), kind)
    return LlmDecision(raw, None, kind)


@dataclass
class PsrCounter:
    p_suc: int = 0
    p_total: int = 0

    def __post_init__(self):
        if not 0 <= self.p_suc <= self.p_total:
            raise ValueError(f"need 0 <= p_suc <= p_total, got {self.p_suc}, {self.p_total}")

    def record(self, decision: LlmDecision) -> None:
        self.p_total += 1
        if decision.valid:
            self.p_suc += 1

    def merge(self, other: PsrCounter) -> PsrCounter:
        return PsrCounter(self.p_suc + other.p_suc, self.p_total + other.p_total)


def psr(counter: PsrCounter) -> float:
    """Prompt success rate as a percentage."""
    if counter.p_total == 0:
        raise ValueError("PSR undefined with zero prompts")
    return 100 * counter.p_suc / counter.p_total
