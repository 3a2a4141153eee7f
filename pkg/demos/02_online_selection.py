"""One agent, one world: watch the selection loop learn.

Each round the agent ranks the catalog by an optimistic score (estimated mean
payoff plus an exploration width), tries models in order until one clears the
task, and absorbs every observed payoff. Regret compares the expected payoff
of its committed cascade against the best possible size-3 cascade.
"""

import numpy as np

from camsel import run_agent
from camsel.presets import canonical_agent_config, canonical_world

world = canonical_world()
config = canonical_agent_config()

records = run_agent(config, world, horizon=8000, seed=0)

cum = np.cumsum([r.instantaneous_regret for r in records])
expected = np.array([r.expected_payoff for r in records])
print("cumulative regret at checkpoints:")
for t in (100, 500, 1000, 2000, 5000, 8000):
    print(f"  t={t:>5}: {cum[t - 1]:7.2f}   per-round {cum[t - 1] / t:.4f}")

print("\ntrailing 200-round mean expected payoff:",
      round(float(expected[-200:].mean()), 4))

# what the converged agent actually tries, per group
late = records[-2000:]
for group, cams in (("A", range(4)), ("B", range(4, 8))):
    firsts = [r.tried_models[0] for r in late if r.camera in cams]
    values, counts = np.unique(firsts, return_counts=True)
    top = values[np.argsort(-counts)][:3]
    print(f"group {group}: most common first picks late in the run: {top.tolist()}")

lengths = [len(r.tried_models) for r in late]
print("\nmean cascade length once converged:", round(float(np.mean(lengths)), 2),
      "(a confident first pick usually succeeds immediately)")
agg = np.mean([r.aggregate_payoff for r in late])
print("realized task success rate:", round(float(agg), 3))
