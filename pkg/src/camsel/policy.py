"""The online model-selection agent and its baselines.

One round: receive a camera, look up its inferred group, refit the group's
perspective-weight estimate, rank the catalog by UCB score, try models in
order until one pays off (or the cascade budget runs out), absorb all tried
(feature, payoff) pairs, refresh the camera's own estimate, apply the edge
deletion rule, then maybe reconnect the graph.

Randomness is split into keyed streams so paired variants on the same seed
see the same camera arrivals and the same per-(round, model) payoff draws:
the payoff of model m at round t is 1 iff u[t, m] < p(camera_t, m), with u a
pre-drawn uniform table. Stopping earlier or later in the cascade therefore
never desynchronizes variants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (LinkFunctionSpec, cascade_payoff, expected_cascade_payoff,
                   link_callables, link_eval)
from .environment import PerspectiveSchedule, World
from .errors import ConfigError
from .estimator import GroupStats, confidence_widths, solve_mle_weighted
from .grouping import (CameraGraph, DeletionRule, ReconnectPolicy, delete_edges,
                       reconnect, set_based_groups)

CASCADE_ORDERS = ("ucb-desc", "tier-then-ucb")
GROUPING_MODES = ("graph", "set")

# Sub-stream tags hung off the run seed.
_ARRIVAL_TAG = 1
_PAYOFF_TAG = 2
_AGENT_TAG = 3
_P0_TAG = 4


def derive_p0(seed: int) -> float:
    """Reproducible stand-in for the algorithm's random p0 in (0, 1)."""
    u = float(np.random.default_rng(np.random.SeedSequence([seed, _P0_TAG])).random())
    return min(max(u, 1e-9), 1.0 - 1e-9)


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.25
    beta: float = 0.1
    zeta: float = 1.0
    p0: float | None = None          # None: derived from the run seed
    k_max: int = 3
    link: LinkFunctionSpec = field(default_factory=LinkFunctionSpec)
    f_id: str = "f1"
    reconnect_mode: str = "whole-graph-reset"
    cascade_order: str = "ucb-desc"
    no_grouping: bool = False
    no_perspective: bool = False
    no_combining: bool = False
    grouping_mode: str = "graph"
    regret_oracle_k: int | None = None   # None: compare against the top-k_max set

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigError(f"alpha must be nonnegative, got {self.alpha}")
        if self.beta <= 0 or self.zeta <= 0:
            raise ConfigError("beta and zeta must be positive")
        if self.p0 is not None and not (0.0 < self.p0 < 1.0):
            raise ConfigError(f"p0 must lie in (0, 1), got {self.p0}")
        if self.k_max < 1:
            raise ConfigError("k_max must be at least 1")
        if self.cascade_order not in CASCADE_ORDERS:
            raise ConfigError(f"unknown cascade order {self.cascade_order!r}")
        if self.grouping_mode not in GROUPING_MODES:
            raise ConfigError(f"unknown grouping mode {self.grouping_mode!r}")
        if self.no_grouping and self.no_perspective:
            raise ConfigError("no_grouping and no_perspective are mutually exclusive")
        # Constructed early so invalid ids/modes fail at config time.
        DeletionRule(self.beta, self.f_id)
        ReconnectPolicy(0.5 if self.p0 is None else self.p0, self.reconnect_mode)


@dataclass(frozen=True)
class RoundRecord:
    t: int
    camera: int
    inferred_group: int
    true_group: int
    tried_models: tuple
    payoffs: tuple
    aggregate_payoff: int
    expected_payoff: float
    oracle_expected_payoff: float
    instantaneous_regret: float
    component_count: int
    bandwidth_spent: float
    edges_deleted: int
    graph_reset: bool


def plan_cascade(scores: np.ndarray, tier_ranks: np.ndarray, k_max: int, order: str,
                 rng=None, random_after_first: bool = False) -> np.ndarray:
    """Ranked model ids this round commits to trying, best first.

    ``ucb-desc`` sorts by score with (edge tier, lower id) tie-breaks;
    ``tier-then-ucb`` puts all edge models ahead of cloud ones. With
    ``random_after_first`` only the leader keeps its rank and the remaining
    slots are drawn uniformly without replacement.
    """
    n_models = scores.shape[0]
    ids = np.arange(n_models)
    if order == "ucb-desc":
        ranked = np.lexsort((ids, tier_ranks, -scores))
    elif order == "tier-then-ucb":
        ranked = np.lexsort((ids, -scores, tier_ranks))
    else:
        raise ConfigError(f"unknown cascade order {order!r}")
    k = min(k_max, n_models)
    if random_after_first and k > 1:
        if rng is None:
            raise ValueError("random_after_first needs an rng")
        first = ranked[0]
        rest = ids[ids != first]
        tail = rng.choice(rest, size=k - 1, replace=False)
        return np.concatenate(([first], tail))
    return ranked[:k]


def execute_cascade(intended, payoff_source):
    """Try the committed models in order, stopping at the first payoff of 1."""
    tried, payoffs = [], []
    for m in intended:
        r = int(payoff_source(int(m)))
        tried.append(int(m))
        payoffs.append(r)
        if r == 1:
            break
    return tried, payoffs


def select_cascade(estimate, group_stats: GroupStats, catalog, k_max: int, alpha: float,
                   order: str, payoff_source, rng=None, *,
                   link: LinkFunctionSpec | None = None,
                   random_after_first: bool = False):
    """Rank the whole catalog by UCB score and run the cascade against
    ``payoff_source``; scores are frozen for the round. Returns (tried, payoffs)."""
    if not catalog:
        raise ValueError("catalog must be non-empty")
    link = link or LinkFunctionSpec()
    feats = np.array([m.features for m in catalog], dtype=float)
    tier_ranks = np.array([0 if m.tier == "edge" else 1 for m in catalog])
    scores = link_eval(link, feats @ estimate.theta_hat) \
        + alpha * confidence_widths(feats, group_stats)
    intended = plan_cascade(scores, tier_ranks, k_max, order, rng, random_after_first)
    return execute_cascade(intended, payoff_source)


class Agent:
    """Stateful executor of the selection loop over one world and one seed."""

    def __init__(self, config: AgentConfig, world: World, horizon: int, seed: int,
                 schedule: PerspectiveSchedule | None = None,
                 initial_graph: CameraGraph | None = None):
        if config.k_max > world.n_models:
            raise ConfigError(
                f"k_max={config.k_max} exceeds the catalog size {world.n_models}")
        if config.p0 is None:
            config = replace(config, p0=derive_p0(seed))
        self.cfg = config
        self.world = world
        self.horizon = horizon
        self.seed = seed
        n, m, d = world.n_cameras, world.n_models, world.dimension
        self.features = world.features
        self.tier_ranks = (world.tiers == "cloud").astype(int)
        self.rule = DeletionRule(config.beta, config.f_id)
        self.reconnect_policy = ReconnectPolicy(config.p0, config.reconnect_mode)
        self.zeta = config.zeta
        self._eye = config.zeta * np.eye(d)
        self._mu = link_callables(config.link)[0]

        self.arrival = np.random.default_rng(
            np.random.SeedSequence([seed, _ARRIVAL_TAG])).integers(0, n, size=horizon)
        self.payoff_u = np.random.default_rng(
            np.random.SeedSequence([seed, _PAYOFF_TAG])).random((horizon, m))
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, _AGENT_TAG]))

        self.assignment = world.camera_groups.copy()
        self.group_probs = np.stack(
            [world.group_success_probs(g) for g in range(world.n_groups)])
        oracle_k = min(config.regret_oracle_k or config.k_max, m)
        ids = np.arange(m)
        self.oracle_sets = []
        self.oracle_expected = np.zeros(world.n_groups)
        for g in range(world.n_groups):
            top = np.lexsort((ids, -self.group_probs[g]))[:oracle_k]
            self.oracle_sets.append(top)
            self.oracle_expected[g] = expected_cascade_payoff(self.group_probs[g][top])
        if schedule is not None:
            schedule.validate_against(world)
            self.events = schedule.events
        else:
            self.events = ()
        self._next_event = 0

        # Learner state, all indexed by camera.
        self.obs_counts = np.zeros((n, m))
        self.obs_success = np.zeros((n, m))
        self.gramians = np.zeros((n, d, d))
        self.responses = np.zeros((n, d))
        self.counts = np.zeros(n, dtype=np.int64)
        self.camera_theta = np.zeros((n, d))
        self.group_theta_cache = {}

        if config.no_perspective or config.grouping_mode == "set":
            self.graph = None
        elif config.no_grouping:
            self.graph = CameraGraph.edgeless(n)
        elif initial_graph is not None:
            # e.g. a k-means warm start from offline prior estimates
            if initial_graph.n != n:
                raise ConfigError(
                    f"initial graph covers {initial_graph.n} cameras, world has {n}")
            self.graph = initial_graph.copy()
        else:
            self.graph = CameraGraph.complete(n)

        self.time_selection = 0.0
        self.time_grouping = 0.0
        self.time_estimation = 0.0

    def _advance_schedule(self, t: int):
        while self._next_event < len(self.events) and self.events[self._next_event][0] <= t:
            _, cam, grp = self.events[self._next_event]
            self.assignment[cam] = grp
            self._next_event += 1

    def _members_for(self, camera: int):
        """(inferred label, member ids, component count) for the current round."""
        cfg = self.cfg
        n = self.world.n_cameras
        if cfg.no_perspective:
            return 0, np.arange(n), 1
        if cfg.no_grouping:
            return camera, np.array([camera]), n
        if cfg.grouping_mode == "set":
            labels = set_based_groups(self.camera_theta, self.counts, self.rule)
            return int(labels[camera]), np.flatnonzero(labels == labels[camera]), \
                int(np.unique(labels).size)
        label, members = self.graph.find_group(camera)
        return label, members, self.graph.component_count()

    def _group_estimate(self, label: int, members: np.ndarray):
        cg = self.obs_counts[members].sum(axis=0)
        sg = self.obs_success[members].sum(axis=0)
        gs = GroupStats(
            gramian_reg=self._eye + self.gramians[members].sum(axis=0),
            response=self.responses[members].sum(axis=0),
            count=int(self.counts[members].sum()),
            zeta=self.zeta,
        )
        est = solve_mle_weighted(gs, self.cfg.link, self.features, cg, sg,
                                 theta0=self.group_theta_cache.get(label))
        self.group_theta_cache[label] = est.theta_hat
        return est, gs

    def _refresh_camera_estimate(self, camera: int):
        gs = GroupStats(
            gramian_reg=self._eye + self.gramians[camera],
            response=self.responses[camera],
            count=int(self.counts[camera]),
            zeta=self.zeta,
        )
        est = solve_mle_weighted(gs, self.cfg.link, self.features,
                                 self.obs_counts[camera], self.obs_success[camera],
                                 theta0=self.camera_theta[camera])
        self.camera_theta[camera] = est.theta_hat

    def step(self, t: int) -> RoundRecord:
        if t < 1:
            raise ValueError(f"round index must be >= 1, got {t}")
        cfg = self.cfg
        camera = int(self.arrival[t - 1])
        self._advance_schedule(t)

        clock = time.perf_counter()
        label, members, component_count = self._members_for(camera)
        self.time_grouping += time.perf_counter() - clock

        clock = time.perf_counter()
        est, gs = self._group_estimate(label, members)
        self.time_estimation += time.perf_counter() - clock

        clock = time.perf_counter()
        scores = self._mu(self.features @ est.theta_hat) \
            + cfg.alpha * confidence_widths(self.features, gs)
        intended = plan_cascade(scores, self.tier_ranks, cfg.k_max, cfg.cascade_order,
                                rng=self.rng, random_after_first=cfg.no_combining)
        u_row = self.payoff_u[t - 1]
        p_row = self.group_probs[self.assignment[camera]]
        tried, payoffs = execute_cascade(intended, lambda m: int(u_row[m] < p_row[m]))
        self.time_selection += time.perf_counter() - clock

        for m, r in zip(tried, payoffs):
            x = self.features[m]
            self.obs_counts[camera, m] += 1
            self.obs_success[camera, m] += r
            self.gramians[camera] += np.outer(x, x)
            self.responses[camera] += r * x
        self.counts[camera] += len(tried)

        edges_deleted = 0
        graph_reset = False
        if not cfg.no_perspective and not cfg.no_grouping:
            clock = time.perf_counter()
            self._refresh_camera_estimate(camera)
            self.time_estimation += time.perf_counter() - clock
            if cfg.grouping_mode == "graph":
                clock = time.perf_counter()
                before = self.graph.edge_count()
                delete_edges(self.graph, camera, self.camera_theta, self.counts, self.rule)
                after_delete = self.graph.edge_count()
                edges_deleted = before - after_delete
                reconnect(self.graph, self.reconnect_policy, t, self.rng)
                graph_reset = self.graph.edge_count() > after_delete
                self.time_grouping += time.perf_counter() - clock

        true_group = int(self.assignment[camera])
        expected = expected_cascade_payoff(p_row[intended])
        oracle_expected = float(self.oracle_expected[true_group])
        return RoundRecord(
            t=t,
            camera=camera,
            inferred_group=label,
            true_group=true_group,
            tried_models=tuple(tried),
            payoffs=tuple(payoffs),
            aggregate_payoff=cascade_payoff(payoffs),
            expected_payoff=expected,
            oracle_expected_payoff=oracle_expected,
            instantaneous_regret=oracle_expected - expected,
            component_count=component_count,
            bandwidth_spent=float(self.world.bandwidth_costs[tried].sum()),
            edges_deleted=edges_deleted,
            graph_reset=graph_reset,
        )

    def run(self) -> list[RoundRecord]:
        return [self.step(t) for t in range(1, self.horizon + 1)]

    def inferred_labels(self) -> np.ndarray:
        """Current partition labels under this agent's grouping mode."""
        if self.cfg.no_perspective:
            return np.zeros(self.world.n_cameras, dtype=int)
        if self.cfg.no_grouping:
            return np.arange(self.world.n_cameras)
        if self.cfg.grouping_mode == "set":
            return set_based_groups(self.camera_theta, self.counts, self.rule)
        return self.graph.component_labels()


def run_agent(config: AgentConfig, world: World, horizon: int, seed: int,
              schedule: PerspectiveSchedule | None = None,
              initial_graph: CameraGraph | None = None) -> list[RoundRecord]:
    """Run one agent for ``horizon`` sequential rounds; horizon 0 is an empty trace."""
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    return Agent(config, world, horizon, seed, schedule, initial_graph).run()


def baseline_greedy(world: World, profile_rounds: int, horizon: int, seed: int,
                    oracle_k: int = 3,
                    schedule: PerspectiveSchedule | None = None) -> list[RoundRecord]:
    """Profile-then-commit baseline.

    Phase 1 cycles through every model on the sampled cameras for
    ``profile_rounds`` rounds; phase 2 plays the single model with the best
    pooled empirical mean for all remaining rounds and all cameras.
    """
    if profile_rounds < 1:
        raise ConfigError(f"profile_rounds must be at least 1, got {profile_rounds}")
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    n, m = world.n_cameras, world.n_models
    arrival = np.random.default_rng(
        np.random.SeedSequence([seed, _ARRIVAL_TAG])).integers(0, n, size=horizon)
    payoff_u = np.random.default_rng(
        np.random.SeedSequence([seed, _PAYOFF_TAG])).random((horizon, m))
    assignment = world.camera_groups.copy()
    group_probs = np.stack([world.group_success_probs(g) for g in range(world.n_groups)])
    ids = np.arange(m)
    oracle_k = min(oracle_k, m)
    oracle_expected = np.array([
        expected_cascade_payoff(group_probs[g][np.lexsort((ids, -group_probs[g]))[:oracle_k]])
        for g in range(world.n_groups)])
    if schedule is not None:
        schedule.validate_against(world)
        events = schedule.events
    else:
        events = ()
    next_event = 0

    tries = np.zeros(m)
    wins = np.zeros(m)
    committed = None
    records = []
    for t in range(1, horizon + 1):
        while next_event < len(events) and events[next_event][0] <= t:
            _, cam, grp = events[next_event]
            assignment[cam] = grp
            next_event += 1
        camera = int(arrival[t - 1])
        if t <= profile_rounds:
            model = (t - 1) % m
        else:
            if committed is None:
                means = wins / np.maximum(tries, 1.0)
                committed = int(np.lexsort((ids, -means))[0])
            model = committed
        p_row = group_probs[assignment[camera]]
        r = int(payoff_u[t - 1, model] < p_row[model])
        tries[model] += 1
        wins[model] += r
        true_group = int(assignment[camera])
        expected = float(p_row[model])
        records.append(RoundRecord(
            t=t, camera=camera, inferred_group=0, true_group=true_group,
            tried_models=(model,), payoffs=(r,), aggregate_payoff=r,
            expected_payoff=expected,
            oracle_expected_payoff=float(oracle_expected[true_group]),
            instantaneous_regret=float(oracle_expected[true_group]) - expected,
            component_count=1, bandwidth_spent=float(world.bandwidth_costs[model]),
            edges_deleted=0, graph_reset=False))
    return records
