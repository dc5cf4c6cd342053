"""Command-line entry point: ``lgx generate|run|sweep|report|replay``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .grounding import GroundingModel
from .harness import (
    SweepAxis, SweepSpec, TwoPhase, classify_two_phase, load_results, load_scenarios,
    run_suite, sweep, sweep_table, write_scenarios,
)
from .houses import generate_houses, two_phase_house
from .llm import API_KEY_ENV, CoOccurrenceOracle, RandomBackend, RemoteBackend, RemoteBackendConfig, ReplayBackend, ResponseCache
from .metrics import summarize
from .perception import ScanConfig
from .policy import Backends, EpisodeConfig, Policy
from .prompt import PromptVariant

log = logging.getLogger("lgx")

BACKENDS = ("oracle", "random", "remote", "replay")


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenarios", nargs="+", help="scenario files or directories of *.json")
    p.add_argument("--n-r", type=int, default=5, help="exploratory turns per episode")
    p.add_argument("--g-th", type=float, default=0.85, help="grounding stop threshold")
    p.add_argument("--e-d", type=float, default=5.0, help="waypoint distance in meters")
    p.add_argument("--resolution", type=float, default=None,
                   help="scan step in degrees (default 30, or 90 for lgx-captions)")
    p.add_argument("--policy", choices=[p.value for p in Policy], default=Policy.LGX_OBJECTS.value)
    p.add_argument("--prompt", choices=[v.value for v in PromptVariant], default=PromptVariant.ROBOT.value)
    p.add_argument("--backend", choices=BACKENDS, default="oracle",
                   help=f"decision backend; 'remote' reads the key from ${API_KEY_ENV}")
    p.add_argument("--backend-id", default=None, help="backend id to look up in replay mode")
    p.add_argument("--endpoint", default=RemoteBackendConfig.endpoint)
    p.add_argument("--model", default=RemoteBackendConfig.model)
    p.add_argument("--cache", default=None, help="reply cache file (default OUT/cache.jsonl)")
    p.add_argument("--grounding", choices=("default", "perfect"), default="default")
    p.add_argument("--detect-prob", type=float, default=1.0)
    p.add_argument("--seed", type=int, nargs="+", default=[0], help="one or more episode seeds")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")


def build_config(args) -> EpisodeConfig:
    """EpisodeConfig from flags; the Blip prompt implies the caption policy."""
    prompt = PromptVariant(args.prompt)
    policy = Policy.LGX_CAPTIONS if prompt is PromptVariant.BLIP else Policy(args.policy)
    cfg = EpisodeConfig(n_r=args.n_r, g_th=args.g_th, e_d=args.e_d,
                        scan=ScanConfig(detect_prob=args.detect_prob))
    cfg = replace(cfg, prompt=prompt).for_policy(policy)
    if args.resolution is not None:
        cfg = replace(cfg, scan=replace(cfg.scan, resolution=args.resolution))
    return cfg


def build_backends(args) -> Backends:
    if args.backend == "oracle":
        llm = CoOccurrenceOracle()
    elif args.backend == "random":
        llm = RandomBackend()
    elif args.backend == "remote":
        llm = RemoteBackend(RemoteBackendConfig(endpoint=args.endpoint, model=args.model))
    else:
        if not args.backend_id:
            raise SystemExit("--backend replay needs --backend-id")
        llm = ReplayBackend(args.backend_id)
    cache_path = args.cache or (Path(args.out) / "cache.jsonl" if args.out else None)
    if args.backend == "replay" and not (cache_path and Path(cache_path).exists()):
        raise SystemExit(f"replay needs an existing cache, got {cache_path}")
    grounding = GroundingModel.perfect() if args.grounding == "perfect" else GroundingModel()
    return Backends(llm=llm, grounding=grounding, cache=ResponseCache(cache_path))


def _run_record(args, backends: Backends) -> dict:
    keys = ("scenarios", "n_r", "g_th", "e_d", "resolution", "policy", "prompt", "grounding",
            "detect_prob", "seed", "endpoint", "model")
    rec = {k: getattr(args, k) for k in keys}
    rec["scenarios"] = [str(Path(s).resolve()) for s in args.scenarios]
    rec["backend_id"] = backends.llm.id
    return rec


def cmd_generate(args) -> int:
    out = Path(args.out or "scenarios")
    scenarios = [two_phase_house()] if args.two_phase else generate_houses(
        args.count, args.seed, args.episodes, args.min_room, args.max_room)
    for p in write_scenarios(scenarios, out):
        print(p)
    return 0


def cmd_run(args) -> int:
    scenarios = load_scenarios(args.scenarios)
    cfg = build_config(args)
    backends = build_backends(args)
    summary, results = run_suite(scenarios, cfg, backends, args.seed, args.parallelism, args.out)
    if args.out:
        (Path(args.out) / "run.json").write_text(json.dumps(_run_record(args, backends), indent=1, sort_keys=True) + "\n")
    print(summary.table())
    if backends.cache is not None:
        print(f"cache misses: {backends.cache.misses}")
    return 0


def cmd_sweep(args) -> int:
    scenarios = load_scenarios(args.scenarios)
    axis = SweepAxis(args.axis)
    values = [float(v) for v in args.values] if axis in (SweepAxis.GTH, SweepAxis.DETECT_PROB) else args.values
    spec = SweepSpec(axis, values, build_config(args), args.seed)
    rows = sweep(spec, scenarios, build_backends(args), args.parallelism, args.out)
    print(sweep_table(axis, rows))
    return 0


def cmd_report(args) -> int:
    results = []
    for path in args.results:
        results.extend(load_results(path))
    summary = summarize(results)
    print(summary.table())
    if args.two_phase:
        worlds = {w.name: w for w, _ in load_scenarios(args.two_phase)}
        counts = {c: 0 for c in TwoPhase}
        for r in results:
            counts[classify_two_phase(r, worlds[r.episode_id.split("/")[0]])] += 1
        print("  ".join(f"{c.value} {n}" for c, n in counts.items()))
    if args.csv:
        Path(args.csv).write_text(summary.to_csv())
    return 0


def cmd_replay(args) -> int:
    """Re-run a recorded suite from its reply cache alone and diff the results."""
    src = Path(args.run)
    rec = json.loads((src / "run.json").read_text())
    ns = argparse.Namespace(**rec)
    ns.backend, ns.backend_id = "replay", rec["backend_id"]
    ns.cache, ns.out = str(src / "cache.jsonl"), args.out
    scenarios = load_scenarios(rec["scenarios"])
    backends = build_backends(ns)
    summary, _ = run_suite(scenarios, build_config(ns), backends, rec["seed"], args.parallelism, args.out)
    print(summary.table())
    if args.out:
        same = (src / "results.jsonl").read_bytes() == (Path(args.out) / "results.jsonl").read_bytes()
        print("results identical" if same else "results DIFFER")
        return 0 if same else 1
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lgx", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="write scenario files")
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--episodes", type=int, default=10, help="episodes per house")
    g.add_argument("--min-room", type=int, default=12)
    g.add_argument("--max-room", type=int, default=20)
    g.add_argument("--two-phase", action="store_true", help="write the fixed two-phase house instead")
    g.add_argument("--out", default=None)
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run a suite")
    _config_args(r)
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="run one suite per value of an axis")
    _config_args(s)
    s.add_argument("--axis", choices=[a.value for a in SweepAxis], required=True)
    s.add_argument("--values", nargs="+", required=True)
    s.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("report", help="summarize results files")
    p.add_argument("results", nargs="+", help="results.jsonl files or run directories")
    p.add_argument("--two-phase", nargs="+", default=None, metavar="SCENARIO",
                   help="also classify failures against these scenarios")
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_report)

    y = sub.add_parser("replay", help="re-run a suite from its reply cache")
    y.add_argument("run", help="directory written by 'lgx run --out'")
    y.add_argument("--parallelism", type=int, default=1)
    y.add_argument("--out", default=None)
    y.set_defaults(fn=cmd_replay)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
