"""Episode loops: LGX (object and caption variants), frontier exploration
with grounding (GoW) and random exploration with grounding."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .grounding import DEFAULT_G_TH, GroundingModel, GroundingResult, check_stop, ground_target
from .llm import Backend, BackendError, CoOccurrenceOracle, ResponseCache, cached_decide
from .perception import (
    DIRECTIONS, CaptionSet, Costmap, DetectionSet, ScanConfig, View, caption_views,
    detect_objects, rotate_scan, update_costmap,
)
from .planning import PlanningError, distance_field, fbe_step, path_length, plan_path, select_waypoint
from .prompt import LlmDecision, PromptVariant, PsrCounter, parse_response, synthesize
from .world import HALLWAY, EpisodeSpec, Pose, WorldMap, shortest_path_length, spawn

DIRECTION_OFFSETS = dict(zip(DIRECTIONS, (0.0, 90.0, 180.0, 270.0)))

# RNG stream ids within an episode
_GROUNDING, _POLICY, _DETECTION, _LLM = range(4)


class Policy(str, Enum):
    LGX_OBJECTS = "lgx-objects"
    LGX_CAPTIONS = "lgx-captions"
    FBE = "fbe"
    RANDOM = "random"


class StopCause(str, Enum):
    GROUNDING = "GroundingStop"
    TURN_BUDGET = "TurnBudget"
    PLANNER_STUCK = "PlannerStuck"


@dataclass(frozen=True)
class EpisodeConfig:
    n_r: int = 5
    g_th: float = DEFAULT_G_TH
    e_d: float = 5.0
    scan: ScanConfig = field(default_factory=ScanConfig)
    policy: Policy = Policy.LGX_OBJECTS
    prompt: PromptVariant = PromptVariant.ROBOT
    seed: int = 0
    fbe_min_distance: float = 1.0

    def __post_init__(self):
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")
        if not 0.0 < self.g_th <= 1.0:
            raise ValueError("g_th must be in (0, 1]")
        if self.e_d <= 0:
            raise ValueError("e_d must be > 0")
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "prompt", PromptVariant(self.prompt))

    def for_policy(self, policy: Policy | str) -> EpisodeConfig:
        """Copy with ``policy`` and the scan resolution it expects."""
        policy = Policy(policy)
        scan = self.scan
        prompt = self.prompt
        if policy is Policy.LGX_CAPTIONS:
            scan = replace(scan, resolution=90.0, fov=None)
            prompt = PromptVariant.BLIP
        elif prompt is PromptVariant.BLIP:
            prompt = PromptVariant.ROBOT
        return replace(self, policy=policy, scan=scan, prompt=prompt)


@dataclass
class Backends:
    llm: Backend = field(default_factory=CoOccurrenceOracle)
    grounding: GroundingModel = field(default_factory=GroundingModel)
    cache: ResponseCache | None = None


@dataclass
class EpisodeResult:
    episode_id: str
    target_label: str
    policy: str
    success: bool
    path_length: float
    optimal_length: float
    turns_used: int
    psr: PsrCounter
    stop_cause: StopCause
    phase_failure: str | None = None
    regions_visited: list[str] = field(default_factory=list)
    final_region: str | None = None
    target_region: str | None = None
    backend_errors: int = 0
    trace: list[dict] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "target_label": self.target_label,
            "policy": self.policy,
            "success": self.success,
            "path_length": round(self.path_length, 9),
            "optimal_length": round(self.optimal_length, 9),
            "turns_used": self.turns_used,
            "p_suc": self.psr.p_suc,
            "p_total": self.psr.p_total,
            "stop_cause": self.stop_cause.value,
            "phase_failure": self.phase_failure,
            "regions_visited": self.regions_visited,
            "final_region": self.final_region,
            "target_region": self.target_region,
            "backend_errors": self.backend_errors,
        }

    @classmethod
    def from_record(cls, rec: dict) -> EpisodeResult:
        return cls(
            episode_id=rec["episode_id"], target_label=rec["target_label"], policy=rec["policy"],
            success=rec["success"], path_length=rec["path_length"], optimal_length=rec["optimal_length"],
            turns_used=rec["turns_used"], psr=PsrCounter(rec["p_suc"], rec["p_total"]),
            stop_cause=StopCause(rec["stop_cause"]), phase_failure=rec.get("phase_failure"),
            regions_visited=list(rec.get("regions_visited", [])), final_region=rec.get("final_region"),
            target_region=rec.get("target_region"), backend_errors=rec.get("backend_errors", 0),
        )


def lgx_reorient(decision: LlmDecision | None, context: DetectionSet | CaptionSet | None,
                 views: list[View], pose: Pose, rng: np.random.Generator) -> float:
    """Heading after an LLM decision; invalid replies fall back to a random one."""
    if decision is not None and decision.valid:
        if decision.choice in DIRECTION_OFFSETS:
            return (pose.heading + DIRECTION_OFFSETS[decision.choice]) % 360.0
        if isinstance(context, DetectionSet) and decision.choice in context.provenance:
            view = views[context.provenance[decision.choice]]
            for s in view.visible_objects:
                if s.label == decision.choice:
                    return s.bearing % 360.0
    return float(rng.uniform(0.0, 360.0))


def _stream(cfg: EpisodeConfig, key: int, stream: int, extra: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, extra], spawn_key=(key, stream)))


def _push_regions(world: WorldMap, cells, regions: list[str]) -> None:
    for c in cells:
        r = world.region_of(c)
        if r is not None and (not regions or regions[-1] != r):
            regions.append(r)


def run_episode(world: WorldMap, spec: EpisodeSpec, cfg: EpisodeConfig,
                backends: Backends | None = None, episode_key: int = 0,
                episode_id: str = "") -> EpisodeResult:
    """Run one episode to a grounding stop, the turn budget, or a dead end."""
    backends = backends or Backends()
    target = world.target(spec.target_label)
    model = backends.grounding.with_similarity(world.similarity) if world.similarity else backends.grounding
    g_rng = _stream(cfg, episode_key, _GROUNDING, model.seed)
    p_rng = _stream(cfg, episode_key, _POLICY)
    d_rng = _stream(cfg, episode_key, _DETECTION)
    l_rng = _stream(cfg, episode_key, _LLM)

    pose = spawn(world, spec.spawn_seed, spec.spawn_room)
    optimal = shortest_path_length(world, pose, target, cfg.scan.max_range)
    costmap = Costmap.empty(world)
    counter = PsrCounter()
    trace: list[dict] = []
    regions: list[str] = []
    _push_regions(world, [world.cell_of(pose)], regions)
    travelled = 0.0
    stop = StopCause.TURN_BUDGET
    hit: GroundingResult | None = None
    errors = 0
    turns = 0

    for turn in range(1, cfg.n_r + 1):
        turns = turn
        scan_cfg = replace(cfg.scan, seed=int(d_rng.integers(2**31)))
        views = rotate_scan(world, pose, scan_cfg)
        costmap = update_costmap(costmap, pose, views)
        results = [ground_target(model, v, target.label, g_rng) for v in views]
        trace.append({"turn": turn, "event": "scan", "pose": [round(pose.x, 6), round(pose.y, 6),
                      round(pose.heading, 6)], "views": [v.summary() for v in views]})
        trace.append({"turn": turn, "event": "grounding",
                      "scores": [round(r.confidence, 6) for r in results]})
        hit = check_stop(results, cfg.g_th)
        if hit is not None:
            stop = StopCause.GROUNDING
            if hit.bearing is not None:
                pose = Pose(pose.x, pose.y, hit.bearing % 360.0)
            trace.append({"turn": turn, "event": "stop", "view": hit.view_index,
                          "confidence": round(hit.confidence, 6)})
            break
        if turn == cfg.n_r:
            break

        here = world.cell_of(pose)
        dist = distance_field(costmap, here)
        try:
            if cfg.policy is Policy.FBE:
                goal = fbe_step(costmap, pose, cfg.fbe_min_distance, dist)
                heading = pose.heading
            else:
                if cfg.policy is Policy.RANDOM:
                    heading = float(p_rng.uniform(0.0, 360.0))
                else:
                    heading, err = _lgx_decide(cfg, backends, target.label, views, scan_cfg,
                                               pose, p_rng, l_rng, counter, trace, turn)
                    errors += err
                goal = select_waypoint(costmap, pose, heading, cfg.e_d, dist)
            path = plan_path(costmap, here, goal)
        except PlanningError as exc:
            stop = StopCause.PLANNER_STUCK
            trace.append({"turn": turn, "event": "stuck", "reason": str(exc)})
            break
        seg = path_length(path, world.cell_size)
        travelled += seg
        if len(path) > 1:
            (x0, y0), (x1, y1) = path[-2], path[-1]
            heading = math.degrees(math.atan2(y1 - y0, x1 - x0)) % 360.0
        pose = world.pose_at(goal, heading)
        _push_regions(world, path, regions)
        trace.append({"turn": turn, "event": "move", "heading": round(heading, 6),
                      "waypoint": list(goal), "length": round(seg, 9)})

    success = stop is StopCause.GROUNDING and world.visible_from(pose, target, cfg.scan.max_range)
    final_region = world.region_of(world.cell_of(pose))
    target_region = world.region_of(target.cells[0])
    phase = None
    if world.hallway and not success:
        phase = "Phase1" if HALLWAY not in regions else "Phase2"
    return EpisodeResult(
        episode_id=episode_id, target_label=target.label, policy=cfg.policy.value, success=success,
        path_length=travelled, optimal_length=optimal, turns_used=turns, psr=counter, stop_cause=stop,
        phase_failure=phase, regions_visited=regions, final_region=final_region,
        target_region=target_region, backend_errors=errors, trace=trace,
    )


def _lgx_decide(cfg, backends, target, views, scan_cfg, pose, p_rng, l_rng, counter, trace, turn):
    seed = int(l_rng.integers(2**31))
    context: DetectionSet | CaptionSet
    if cfg.policy is Policy.LGX_CAPTIONS:
        context = caption_views(views)
        valid = list(DIRECTIONS)
        hints = context.labels_by_direction()
        prompt = synthesize(PromptVariant.BLIP, target, context)
        kind = "direction"
    else:
        context = detect_objects(views, scan_cfg)
        if not context:
            trace.append({"turn": turn, "event": "no-detections"})
            return lgx_reorient(None, context, views, pose, p_rng), 0
        valid = list(context.labels)
        hints = None
        prompt = synthesize(cfg.prompt, target, context)
        kind = "object"
    err = 0
    try:
        raw = cached_decide(backends.cache, backends.llm, prompt, valid, seed, target=target, hints=hints)
    except BackendError as exc:
        raw, err = "", 1
        trace.append({"turn": turn, "event": "backend-error", "error": str(exc)})
    decision = parse_response(raw, valid, kind)
    counter.record(decision)
    heading = lgx_reorient(decision, context, views, pose, p_rng)
    trace.append({"turn": turn, "event": "decision", "prompt": prompt, "valid_set": valid,
                  "raw": raw, "choice": decision.choice, "heading": round(heading, 6)})
    return heading, err
