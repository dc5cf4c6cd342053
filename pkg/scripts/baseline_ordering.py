"""Two-phase house: LGX against frontier exploration with grounding (GoW)
and random exploration, plus the Success/Phase1/Phase2 breakdown."""
import argparse
from collections import Counter

from lgx.grounding import GroundingModel
from lgx.harness import TwoPhase, classify_two_phase, run_suite
from lgx.houses import two_phase_house
from lgx.policy import Backends, EpisodeConfig, Policy

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
ap.add_argument("--perfect-grounding", action="store_true")
ap.add_argument("--parallelism", type=int, default=4)
ap.add_argument("--out", default="runs/two-phase")
args = ap.parse_args()

world, episodes = two_phase_house()
grounding = GroundingModel.perfect() if args.perfect_grounding else GroundingModel()
names = {Policy.LGX_OBJECTS: "LGX", Policy.FBE: "GoW", Policy.RANDOM: "Random"}
print(f"{'method':<8} {'SR':>6} {'SPL':>6} " + " ".join(f"{c.value:>8}" for c in TwoPhase))
for policy, name in names.items():
    cfg = EpisodeConfig().for_policy(policy)
    summary, results = run_suite([(world, episodes)], cfg, Backends(grounding=grounding),
                                 args.seeds, args.parallelism, f"{args.out}/{policy.value}")
    phases = Counter(classify_two_phase(r, world) for r in results)
    print(f"{name:<8} {summary.sr:>6.1f} {summary.spl:>6.1f} " + " ".join(f"{phases[c]:>8}" for c in TwoPhase))
