"""Worlds, payoffs, and the ground-truth oracle.

A world is a set of cameras partitioned into groups, one perspective-weight
vector per group, and a catalog of candidate models with feature vectors.
The chance that a model satisfies the task for a camera is a monotone link
of the feature/weight inner product.
"""

import numpy as np

from camsel import (WorldConfig, generate_world, oracle_best_set, sample_camera,
                    sample_payoff)
from camsel.presets import canonical_world

# --- a generated world: everything is drawn from (config, seed) -------------
config = WorldConfig(n_groups=2, n_cameras=8, dimension=5, gamma=0.5, n_models=12)
world = generate_world(config, seed=3)
print(f"generated world: {world.n_cameras} cameras, {world.n_groups} groups, "
      f"{world.n_models} models, payoff mode {world.payoff_mode}")
print("group weight separation:",
      round(float(np.linalg.norm(world.group_thetas[0] - world.group_thetas[1])), 3),
      "(dispersion constant is", world.dispersion_gamma, ")")

# --- the canonical reference world -------------------------------------------
canon = canonical_world()
print("\ncanonical world success probabilities (group A):")
print(" ", np.array2string(canon.success_probs(0), precision=3))
print("canonical world success probabilities (group B):")
print(" ", np.array2string(canon.success_probs(7), precision=3))

# each group prefers a different triple of models
print("\nbest 3 models per group (ties to the lower id):")
print("  group A camera:", oracle_best_set(canon, 0, 3))
print("  group B camera:", oracle_best_set(canon, 7, 3))

# --- sampling -----------------------------------------------------------------
rng = np.random.default_rng(0)
arrivals = [sample_camera(canon, rng) for _ in range(10)]
print("\nten uniform camera arrivals:", arrivals)

best = oracle_best_set(canon, 0, 1)[0]
draws = [sample_payoff(canon, 0, best, rng) for _ in range(2000)]
print(f"empirical payoff rate of model {best} on camera 0:",
      round(float(np.mean(draws)), 3),
      " (true", round(float(canon.success_probs(0)[best]), 3), ")")
