"""Prompt-variant ablation: one suite per template, same episodes and seeds.

With the oracle backend every variant gets a valid reply, so PSR is 100
across the board; pass ``--backend remote`` (key in $LGX_API_KEY) to
measure a real model.  Replies are cached under --out.
"""
import argparse

from lgx.harness import SweepAxis, SweepSpec, sweep, sweep_table
from lgx.houses import generate_houses
from lgx.llm import CoOccurrenceOracle, RandomBackend, RemoteBackend, RemoteBackendConfig, ResponseCache
from lgx.policy import Backends, EpisodeConfig
from lgx.prompt import PromptVariant

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--backend", choices=("oracle", "random", "remote"), default="oracle")
ap.add_argument("--model", default=RemoteBackendConfig.model)
ap.add_argument("--houses", type=int, default=5)
ap.add_argument("--episodes", type=int, default=10)
ap.add_argument("--seeds", type=int, nargs="+", default=[0])
ap.add_argument("--parallelism", type=int, default=4)
ap.add_argument("--out", default="runs/prompt")
args = ap.parse_args()

llm = {"oracle": CoOccurrenceOracle, "random": RandomBackend}.get(args.backend)
llm = llm() if llm else RemoteBackend(RemoteBackendConfig(model=args.model))
backends = Backends(llm=llm, cache=ResponseCache(f"{args.out}/cache.jsonl"))
scenarios = generate_houses(args.houses, 0, args.episodes)
spec = SweepSpec(SweepAxis.PROMPT, [v.value for v in PromptVariant], EpisodeConfig(), args.seeds)
rows = sweep(spec, scenarios, backends, args.parallelism, args.out)
print(sweep_table(spec.axis, rows))
