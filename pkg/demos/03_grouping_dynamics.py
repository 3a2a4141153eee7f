"""The dynamic camera graph: deletion, reconnection, and what the deletion
width really controls.

The graph starts complete; an edge (a, b) dies when the distance between the
cameras' own weight estimates exceeds beta * (f(T_a) + f(T_b)). The demo
tracks the component count over time and then shows the scale mismatch that
makes exact recovery impossible at a small beta: per-camera estimate noise
under binary feedback dwarfs the shrinking threshold, for any deletion
function in the family.
"""

import numpy as np

from camsel.grouping import DeletionRule, deletion_threshold, set_based_groups
from camsel.policy import Agent
from camsel.presets import canonical_agent_config, canonical_world

world = canonical_world()

agent = Agent(canonical_agent_config(), world, horizon=3000, seed=0)
marks = {1, 10, 50, 100, 300, 1000, 3000}
print("component count over time (beta = 0.1):")
for t in range(1, 3001):
    agent.step(t)
    if t in marks:
        print(f"  t={t:>5}: {agent.graph.component_count()} components, "
              f"{agent.graph.edge_count()} edges")

# the measured scales behind that collapse
est, counts = agent.camera_theta, agent.counts
dist = np.linalg.norm(est[:, None, :] - est[None, :, :], axis=2)
within = [dist[a, b] for a in range(4) for b in range(a + 1, 4)]
cross = [dist[a, b] for a in range(4) for b in range(4, 8)]
rule = DeletionRule(beta=0.1, f_id="f1")
thr = deletion_threshold(rule, float(counts.mean()), float(counts.mean()))
print(f"\nafter 3000 rounds: within-group estimate distances "
      f"{min(within):.2f}..{max(within):.2f}, cross-group {min(cross):.2f}.."
      f"{max(cross):.2f}, deletion threshold {thr:.3f}")
print("every distance is far above the threshold, so all edges die; the")
print("threshold that separates the two populations here would need a beta")
print("two orders of magnitude larger, and even then the two distance")
print("distributions overlap at this feedback volume.")

# the soundness direction that DOES hold: accurate estimates + the gamma/2
# rule recover the exact partition
rng = np.random.default_rng(1)
gamma = world.dispersion_gamma
noise = rng.standard_normal((8, 5))
noise /= np.linalg.norm(noise, axis=1, keepdims=True)
estimates = world.group_thetas[world.camera_groups] \
    + noise * (rng.random(8) * gamma / 4)[:, None]
labels = set_based_groups(estimates, np.zeros(8), rule, fixed_threshold=gamma / 2)
print("\nwith estimates inside gamma/4 balls, the gamma/2 rule recovers the")
print("ground-truth partition exactly:", labels.tolist())
