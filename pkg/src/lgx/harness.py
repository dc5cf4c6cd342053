"""Suite execution, sweeps, two-phase failure classification and reports."""
from __future__ import annotations

import json
import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

from .metrics import SuiteSummary, summarize
from .perception import ScanConfig
from .policy import Backends, EpisodeConfig, EpisodeResult, Policy, run_episode
from .prompt import PromptVariant
from .world import HALLWAY, EpisodeSpec, WorldMap, load_scenario, save_scenario

log = logging.getLogger(__name__)

Scenario = tuple[WorldMap, list[EpisodeSpec]]


class SweepAxis(str, Enum):
    GTH = "gth"
    PROMPT = "prompt"
    POLICY = "policy"
    DETECT_PROB = "detect-prob"


@dataclass
class SweepSpec:
    axis: SweepAxis
    values: list
    base: EpisodeConfig = field(default_factory=EpisodeConfig)
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])

    def __post_init__(self):
        self.axis = SweepAxis(self.axis)
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        if not self.seeds:
            raise ValueError("sweep seeds must be non-empty")

    def config_for(self, value) -> EpisodeConfig:
        b = self.base
        if self.axis is SweepAxis.GTH:
            return replace(b, g_th=float(value))
        if self.axis is SweepAxis.PROMPT:
            v = PromptVariant(value)
            if v is PromptVariant.BLIP:
                return b.for_policy(Policy.LGX_CAPTIONS)
            return replace(b.for_policy(Policy.LGX_OBJECTS), prompt=v)
        if self.axis is SweepAxis.POLICY:
            return b.for_policy(value)
        return replace(b, scan=replace(b.scan, detect_prob=float(value)))


def episode_key(episode_id: str) -> int:
    return zlib.crc32(episode_id.encode())


def _jobs(scenarios: Sequence[Scenario], seeds: Sequence[int]):
    for world, episodes in scenarios:
        for i, spec in enumerate(episodes):
            base_id = f"{world.name}/{i:03d}"
            for s in seeds:
                yield world, spec, base_id, s


def run_suite(scenarios: Sequence[Scenario], cfg: EpisodeConfig, backends: Backends | None = None,
              seeds: Sequence[int] | None = None, parallelism: int = 1,
              out_dir: str | Path | None = None) -> tuple[SuiteSummary, list[EpisodeResult]]:
    """Run every (episode, seed) pair; outputs are ordered by episode id so
    they do not depend on ``parallelism``."""
    backends = backends or Backends()
    seeds = list(seeds) if seeds is not None else [cfg.seed]
    jobs = list(_jobs(scenarios, seeds))

    def one(job) -> EpisodeResult:
        world, spec, base_id, s = job
        eid = f"{base_id}/s{s}"
        return run_episode(world, spec, replace(cfg, seed=s), backends, episode_key(base_id), eid)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    results.sort(key=lambda r: r.episode_id)
    summary = summarize(results)
    if out_dir is not None:
        write_outputs(Path(out_dir), results, summary, cfg)
    return summary, results


def config_record(cfg: EpisodeConfig) -> dict:
    return {
        "n_r": cfg.n_r, "g_th": cfg.g_th, "e_d": cfg.e_d, "policy": cfg.policy.value,
        "prompt": cfg.prompt.value, "resolution": cfg.scan.resolution, "fov": cfg.scan.view_fov,
        "max_range": cfg.scan.max_range, "detect_prob": cfg.scan.detect_prob,
    }


def write_outputs(out: Path, results: Sequence[EpisodeResult], summary: SuiteSummary,
                  cfg: EpisodeConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with (out / "results.jsonl").open("w") as fh:
        for r in results:
            fh.write(json.dumps(r.to_record(), sort_keys=True) + "\n")
    with (out / "traces.jsonl").open("w") as fh:
        for r in results:
            for rec in r.trace:
                fh.write(json.dumps({"episode_id": r.episode_id, **rec}, sort_keys=True) + "\n")
    (out / "summary.json").write_text(
        json.dumps({"config": config_record(cfg), "summary": summary.to_dict()}, indent=1, sort_keys=True) + "\n")
    (out / "summary.csv").write_text(summary.to_csv())


def load_results(path: str | Path) -> list[EpisodeResult]:
    path = Path(path)
    if path.is_dir():
        path = path / "results.jsonl"
    with path.open() as fh:
        return [EpisodeResult.from_record(json.loads(l)) for l in fh if l.strip()]


def sweep(spec: SweepSpec, scenarios: Sequence[Scenario], backends: Backends | None = None,
          parallelism: int = 1, out_dir: str | Path | None = None) -> list[tuple[object, SuiteSummary]]:
    """One suite per value; every value sees the same episodes and seeds."""
    rows = []
    for value in spec.values:
        cfg = spec.config_for(value)
        sub = Path(out_dir) / f"{spec.axis.value}={value}" if out_dir else None
        summary, _ = run_suite(scenarios, cfg, backends, spec.seeds, parallelism, sub)
        log.info("%s=%s: SR %.1f SPL %.1f", spec.axis.value, value, summary.sr, summary.spl)
        rows.append((value, summary))
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "sweep.csv").write_text(sweep_table(spec.axis, rows, csv=True))
    return rows


def sweep_table(axis: SweepAxis, rows, csv: bool = False) -> str:
    if csv:
        lines = [f"{axis.value},sr,spl,psr,n"]
        for v, s in rows:
            psr_s = "" if s.psr is None else f"{s.psr:.6f}"
            lines.append(f"{v},{s.sr:.6f},{s.spl:.6f},{psr_s},{s.n_episodes}")
        return "\n".join(lines) + "\n"
    lines = [f"{axis.value:>14} {'SR (%)':>8} {'SPL (%)':>8} {'PSR (%)':>8}"]
    for v, s in rows:
        psr_s = "-" if s.psr is None else f"{s.psr:.1f}"
        lines.append(f"{str(v):>14} {s.sr:>8.1f} {s.spl:>8.1f} {psr_s:>8}")
    return "\n".join(lines)


class TwoPhase(str, Enum):
    SUCCESS = "Success"
    PHASE1 = "Phase1"
    PHASE2 = "Phase2"


def classify_two_phase(result: EpisodeResult, world: WorldMap) -> TwoPhase:
    """Success, or where the exploration went wrong: never reaching the
    hallway (Phase1) or reaching it but not finishing (Phase2)."""
    if not world.hallway:
        raise ValueError(f"scenario {world.name!r} has no hallway region")
    if result.success:
        return TwoPhase.SUCCESS
    if HALLWAY not in result.regions_visited:
        return TwoPhase.PHASE1
    return TwoPhase.PHASE2


def load_scenarios(paths: Sequence[str | Path]) -> list[Scenario]:
    files: list[Path] = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return [load_scenario(f) for f in files]


def write_scenarios(scenarios: Sequence[Scenario], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    return [save_scenario(out / f"{w.name}.json", w, eps) for w, eps in scenarios]
