"""Paired ablations: what each mechanism buys.

All variants on the same seed consume identical camera arrivals and identical
per-(round, model) payoff draws, so the deltas below are paired comparisons,
not noise.
"""

import numpy as np

from camsel import ExperimentConfig, run_experiment, save_world, tradeoff_score
from camsel.presets import canonical_agent_config, canonical_world

import tempfile
from pathlib import Path

world = canonical_world()
tmp = Path(tempfile.mkdtemp())
world_path = tmp / "world.json"
save_world(world, world_path)

cfg = ExperimentConfig(
    agent=canonical_agent_config(),
    world=None,
    world_path=str(world_path),
    variants=("default", "tier-first", "no-combining", "no-perspective",
              "no-grouping", "greedy"),
    horizon=6000,
    seeds=(0, 1, 2, 3),
    workers=2,
)
result = run_experiment(cfg)

print(f"{'variant':<16} {'trailing payoff':>16} {'cum regret':>12} {'bandwidth':>10}")
for variant in cfg.variants:
    block = result.summary["variants"][variant]
    trail = float(np.mean(block["final_trailing_payoff"]))
    reg = block["cum_regret_mean"][-1]
    bw = float(np.mean(block["total_bandwidth"]))
    print(f"{variant:<16} {trail:>16.4f} {reg:>12.1f} {bw:>10.0f}")

d = result.summary["variants"]
gap_c = np.mean(d["default"]["final_trailing_payoff"]) \
    - np.mean(d["no-combining"]["final_trailing_payoff"])
gap_p = np.mean(d["default"]["final_trailing_payoff"]) \
    - np.mean(d["no-perspective"]["final_trailing_payoff"])
print(f"\ncascade (combining) is worth {gap_c:+.4f} trailing payoff")
print(f"per-group weights (perspective) are worth {gap_p:+.4f} trailing payoff")

# accuracy/bandwidth trade-off: normalize bandwidth by the worst variant
bws = {v: float(np.mean(d[v]["total_bandwidth"])) for v in cfg.variants}
worst = max(bws.values())
print(f"\ntrade-off score (accuracy - 0.5 * normalized bandwidth):")
for variant in cfg.variants:
    acc = float(np.mean(d[variant]["final_trailing_payoff"]))
    score = tradeoff_score(acc, bws[variant] / worst, eta=0.5)
    print(f"  {variant:<16} {score:+.4f}")
