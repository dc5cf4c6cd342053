"""Open-vocabulary grounding stand-in and the confidence-threshold stop rule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .perception import View

# Tuned so P(score >= 0.85 | target visible) = 0.875 with a 0.92 base score.
DEFAULT_TP_BASE = 0.92
DEFAULT_TP_NOISE = 0.0609
DEFAULT_FP_RATE = 0.083
DEFAULT_FP_SCORES = (0.5, 0.9)
DEFAULT_G_TH = 0.85


@dataclass(frozen=True)
class GroundingModel:
    """Noise model for phrase grounding.

    ``similarity`` maps ``(phrase, label)`` to a base score.  An object whose
    label equals the phrase scores ``tp_base`` unless the table says
    otherwise; any other label scores 0 unless scripted (confusable
    distractors such as "mug" for "cat-shaped mug").
    """

    similarity: dict[tuple[str, str], float] = field(default_factory=dict)
    tp_base: float = DEFAULT_TP_BASE
    true_pos_noise: float = DEFAULT_TP_NOISE
    false_pos_rate: float = DEFAULT_FP_RATE
    false_pos_scores: tuple[float, float] = DEFAULT_FP_SCORES
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.false_pos_scores
        for name, v in (("tp_base", self.tp_base), ("false_pos_rate", self.false_pos_rate),
                        ("false_pos_scores[0]", lo), ("false_pos_scores[1]", hi)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} not in [0, 1]")
        if lo > hi:
            raise ValueError("false_pos_scores must be an ordered interval")
        if self.true_pos_noise < 0:
            raise ValueError("true_pos_noise must be >= 0")
        for key, v in self.similarity.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"similarity{key}={v} not in [0, 1]")

    @classmethod
    def perfect(cls, **kw) -> GroundingModel:
        return cls(**{"tp_base": 1.0, "true_pos_noise": 0.0, "false_pos_rate": 0.0, **kw})

    def with_similarity(self, table: dict[tuple[str, str], float]) -> GroundingModel:
        merged = dict(self.similarity)
        merged.update(table)
        return GroundingModel(merged, self.tp_base, self.true_pos_noise, self.false_pos_rate,
                              self.false_pos_scores, self.seed)

    def score(self, phrase: str, label: str) -> float:
        key = (phrase, label)
        if key in self.similarity:
            return self.similarity[key]
        return self.tp_base if phrase == label else 0.0

    def rng(self, *stream: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=tuple(stream)))


@dataclass(frozen=True)
class GroundingResult:
    confidence: float = 0.0
    bearing: float | None = None
    matched_object: str | None = None
    view_index: int | None = None


def ground_target(model: GroundingModel, view: View, target_phrase: str,
                  rng: np.random.Generator | None = None) -> GroundingResult:
    """Score how strongly ``target_phrase`` is present in ``view``.

    A visible object carrying the phrase as its label is a true match.
    Otherwise scripted look-alikes are scored, and a spurious detection
    fires with probability ``false_pos_rate``; the higher of the two wins.
    Draws per call are fixed (one gaussian, three uniforms) so streams stay
    aligned across configurations.
    """
    if not target_phrase:
        raise ValueError("target_phrase must be non-empty")
    if rng is None:
        rng = model.rng(view.index)
    noise = rng.normal(0.0, 1.0) * model.true_pos_noise
    u_fire = rng.random()
    u_score = rng.random()
    u_pick = rng.random()

    best = None
    for s in view.visible_objects:
        if s.label == target_phrase:
            if best is None or s.distance < best.distance:
                best = s
    if best is not None:
        conf = float(np.clip(model.score(target_phrase, best.label) + noise, 0.0, 1.0))
        return GroundingResult(conf, best.bearing, best.object_id if conf > 0 else None, view.index)

    conf, bearing = 0.0, None
    for s in view.visible_objects:
        base = model.score(target_phrase, s.label)
        if base > 0:
            c = float(np.clip(base + noise, 0.0, 1.0))
            if c > conf:
                conf, bearing = c, s.bearing
    if u_fire < model.false_pos_rate:
        lo, hi = model.false_pos_scores
        c = lo + (hi - lo) * u_score
        if c > conf:
            conf = c
            if view.visible_objects:
                pick = view.visible_objects[int(u_pick * len(view.visible_objects))]
                bearing = pick.bearing
            else:
                bearing = view.heading
    return GroundingResult(conf, bearing, None, view.index)


def check_stop(results: list[GroundingResult], g_th: float) -> GroundingResult | None:
    """First result at or above the threshold, else None.

    With ``g_th == 0`` a zero-confidence result does not count as a stop.
    """
    for r in results:
        if r.confidence >= g_th and r.confidence > 0:
            return r
    return None
