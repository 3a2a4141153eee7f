"""Sufficient statistics, penalized GLM estimation via damped Newton, UCB scores.

The estimating equation solved here is the zeta-penalized score

    score(theta) = sum_i w_i * (rbar_i - mu(x_i.theta)) * x_i - zeta * theta = 0

where each row may carry an integer weight (repeated observations of the same
feature vector collapse into one weighted row; w_i * rbar_i is the summed
response). With zeta > 0 the Newton system matrix zeta*I + sum w_i mu'(x_i.theta)
x_i x_i^T is always positive definite, so no invertibility guard is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LinkFunctionSpec, link_callables, link_eval
from .errors import NumericError

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100
MAX_HALVINGS = 30


@dataclass(frozen=True)
class SufficientStats:
    """Per-camera running sums: Gramian, weighted response, feedback count."""

    gramian: np.ndarray
    response: np.ndarray
    count: int

    @classmethod
    def zeros(cls, dim: int) -> "SufficientStats":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0)

    @property
    def dim(self) -> int:
        return self.response.shape[0]


@dataclass(frozen=True)
class GroupStats:
    """Regularized aggregate over a group of cameras: zeta*I + sum of Gramians."""

    gramian_reg: np.ndarray
    response: np.ndarray
    count: int
    zeta: float

    @property
    def dim(self) -> int:
        return self.response.shape[0]


@dataclass(frozen=True)
class Estimate:
    theta_hat: np.ndarray
    converged: bool
    iterations: int
    gradient_norm: float


def update_stats(stats: SufficientStats, x: np.ndarray, r) -> SufficientStats:
    """Absorb one (feature, binary payoff) observation; returns new stats."""
    x = np.asarray(x, dtype=float)
    if x.shape != (stats.dim,):
        raise ValueError(f"feature dimension {x.shape} does not match stats dimension ({stats.dim},)")
    return SufficientStats(
        gramian=stats.gramian + np.outer(x, x),
        response=stats.response + float(r) * x,
        count=stats.count + 1,
    )


def aggregate_group(members, zeta: float, dim: int | None = None) -> GroupStats:
    """Sum member statistics and add the zeta*I regularizer.

    An empty member list is a valid cold-start group, but then ``dim`` must be
    given explicitly.
    """
    if zeta <= 0:
        raise ValueError(f"zeta must be positive, got {zeta}")
    members = list(members)
    if not members:
        if dim is None:
            raise ValueError("dim is required to aggregate an empty member list")
        return GroupStats(zeta * np.eye(dim), np.zeros(dim), 0, zeta)
    d = members[0].dim
    if dim is not None and dim != d:
        raise ValueError(f"dim={dim} does not match member dimension {d}")
    if any(m.dim != d for m in members):
        raise ValueError("member statistics have mixed dimensions")
    gram = zeta * np.eye(d)
    resp = np.zeros(d)
    count = 0
    for m in members:
        gram += m.gramian
        resp += m.response
        count += m.count
    return GroupStats(gram, resp, count, zeta)


def _newton(feats, weights, resp_sums, zeta, link, theta0, tol, max_iter):
    """Damped Newton on the penalized score. ``resp_sums`` holds w_i * rbar_i."""
    d = feats.shape[1]
    theta = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    mu, mu_prime = link_callables(link)

    def score(th):
        resid = resp_sums - weights * mu(feats @ th)
        return feats.T @ resid - zeta * th

    g = score(theta)
    gnorm = float(np.linalg.norm(g))
    iters = 0
    while gnorm > tol and iters < max_iter:
        slope = weights * mu_prime(feats @ theta)
        hess = zeta * np.eye(d) + (feats * slope[:, None]).T @ feats
        delta = np.linalg.solve(hess, g)
        step = 1.0
        improved = False
        for _ in range(MAX_HALVINGS):
            cand = theta + step * delta
            g_new = score(cand)
            gn = float(np.linalg.norm(g_new))
            if np.isfinite(gn) and gn < gnorm:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        theta, g, gnorm = cand, g_new, gn
        if not np.all(np.isfinite(theta)):
            raise NumericError("Newton iterate became non-finite")
        iters += 1
    return Estimate(theta_hat=theta, converged=gnorm <= tol, iterations=iters, gradient_norm=gnorm)


def solve_mle(gs: GroupStats, link: LinkFunctionSpec, X, r,
              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
              theta0=None) -> Estimate:
    """Penalized MLE from raw (x, r) pairs of the group's history.

    ``X`` is (n, d), ``r`` is (n,). The history must account for exactly the
    observations absorbed into ``gs``.
    """
    X = np.asarray(X, dtype=float).reshape(-1, gs.dim)
    r = np.asarray(r, dtype=float).reshape(-1)
    if X.shape[0] != r.shape[0]:
        raise ValueError(f"history mismatch: {X.shape[0]} features vs {r.shape[0]} payoffs")
    if X.shape[0] != gs.count:
        raise ValueError(f"history holds {X.shape[0]} observations but stats count {gs.count}")
    return _newton(X, np.ones(X.shape[0]), r, gs.zeta, link, theta0, tol, max_iter)


def solve_mle_weighted(gs: GroupStats, link: LinkFunctionSpec, feats, counts, successes,
                       tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                       theta0=None) -> Estimate:
    """Penalized MLE from per-model aggregates.

    ``counts[m]`` observations of model m's feature row with ``successes[m]``
    total payoff is likelihood-equivalent to the raw pair history and keeps
    each Newton pass O(catalog) instead of O(rounds).
    """
    feats = np.asarray(feats, dtype=float)
    counts = np.asarray(counts, dtype=float)
    successes = np.asarray(successes, dtype=float)
    if int(round(counts.sum())) != gs.count:
        raise ValueError(f"aggregates hold {counts.sum():.0f} observations but stats count {gs.count}")
    mask = counts > 0
    return _newton(feats[mask], counts[mask], successes[mask], gs.zeta, link, theta0, tol, max_iter)


def confidence_width(x: np.ndarray, gs: GroupStats) -> float:
    """The norm sqrt(x^T M^{-1} x) under the regularized group Gramian M."""
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(x @ np.linalg.solve(gs.gramian_reg, x)))


def confidence_widths(X: np.ndarray, gs: GroupStats) -> np.ndarray:
    """Row-wise confidence widths for a whole catalog at once."""
    X = np.asarray(X, dtype=float)
    solved = np.linalg.solve(gs.gramian_reg, X.T)
    return np.sqrt(np.einsum("ij,ji->i", X, solved))


def ucb_score(x: np.ndarray, est: Estimate, gs: GroupStats, alpha: float,
              link: LinkFunctionSpec) -> float:
    """Optimistic score mu(x.theta_hat) + alpha * sqrt(x^T M^{-1} x)."""
    x = np.asarray(x, dtype=float)
    return float(link_eval(link, float(x @ est.theta_hat)) + alpha * confidence_width(x, gs))


def ucb_scores(X: np.ndarray, est: Estimate, gs: GroupStats, alpha: float,
               link: LinkFunctionSpec) -> np.ndarray:
    """Vectorized :func:`ucb_score` over catalog rows."""
    X = np.asarray(X, dtype=float)
    return link_eval(link, X @ est.theta_hat) + alpha * confidence_widths(X, gs)
