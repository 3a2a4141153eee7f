import math

import numpy as np
import pytest

from camsel.core import (LinkConstants, LinkFunctionSpec, cascade_payoff,
                         expected_cascade_payoff, link_constants, link_derivative,
                         link_eval)
from camsel.errors import ConfigError

SIGMOID = LinkFunctionSpec("sigmoid")
IDENTITY = LinkFunctionSpec("identity")
CLIPPED = LinkFunctionSpec("clipped-linear")

# High-precision scalar oracles, frozen.
SIGMOID_AT_1 = 0.7310585786300049
SIGMOID_PRIME_AT_2 = 0.10499358540350652


def test_link_eval_basics():
    assert link_eval(SIGMOID, 0.0) == 0.5
    assert link_eval(IDENTITY, 0.37) == 0.37
    assert link_eval(SIGMOID, 1.0) == pytest.approx(SIGMOID_AT_1, abs=1e-12)
    assert link_eval(CLIPPED, -0.2) == 0.0
    assert link_eval(CLIPPED, 0.4) == pytest.approx(0.4)
    assert link_eval(CLIPPED, 1.7) == 1.0


def test_link_eval_vectorized():
    z = np.array([-1.0, 0.0, 1.0])
    out = link_eval(SIGMOID, z)
    assert out.shape == (3,)
    assert np.all((out > 0) & (out < 1))


def test_link_eval_rejects_nonfinite():
    for bad in (float("nan"), float("inf")):
        with pytest.raises(ValueError):
            link_eval(SIGMOID, bad)
        with pytest.raises(ValueError):
            link_derivative(IDENTITY, bad)


def test_link_derivative_values():
    assert link_derivative(SIGMOID, 0.0) == 0.25
    assert link_derivative(IDENTITY, -3.0) == 1.0
    assert link_derivative(SIGMOID, 2.0) == pytest.approx(SIGMOID_PRIME_AT_2, abs=1e-6)
    assert link_derivative(CLIPPED, 0.5) == 1.0
    assert link_derivative(CLIPPED, 1.5) == 0.0


def test_derivative_matches_finite_differences(rng):
    h = 1e-6
    for spec in (SIGMOID, IDENTITY):
        z = rng.uniform(-2, 2, 1000)
        fd = (link_eval(spec, z + h) - link_eval(spec, z - h)) / (2 * h)
        assert np.max(np.abs(link_derivative(spec, z) - fd)) < 1e-5


def test_monotonicity(rng):
    for spec in (SIGMOID, IDENTITY):
        z = np.sort(rng.uniform(-spec.domain_bound, spec.domain_bound, 500))
        vals = link_eval(spec, z)
        assert np.all(np.diff(vals) > 0)


def test_lipschitz_bound(rng):
    for spec in (SIGMOID, IDENTITY):
        consts = link_constants(spec)
        z1 = rng.uniform(-2, 2, 2000)
        z2 = rng.uniform(-2, 2, 2000)
        lhs = np.abs(link_eval(spec, z1) - link_eval(spec, z2))
        assert np.all(lhs <= consts.lipschitz_L * np.abs(z1 - z2) + 1e-12)


def test_link_constants_sigmoid_default_interval():
    consts = link_constants(SIGMOID)
    assert consts.lipschitz_L == 0.25
    assert consts.m_mu == pytest.approx(SIGMOID_PRIME_AT_2, abs=1e-12)
    # grid-scan oracle over [-2, 2]
    grid = np.arange(-2.0, 2.0 + 1e-9, 1e-4)
    slopes = link_derivative(SIGMOID, grid)
    assert consts.lipschitz_L == pytest.approx(float(slopes.max()), abs=1e-8)
    assert consts.m_mu == pytest.approx(float(slopes.min()), abs=1e-8)


def test_link_constants_identity_and_degenerate():
    consts = link_constants(IDENTITY)
    assert (consts.lipschitz_L, consts.m_mu) == (1.0, 1.0)
    degenerate = link_constants(LinkFunctionSpec("sigmoid", domain_bound=0.0))
    assert degenerate.lipschitz_L == degenerate.m_mu == 0.25


def test_link_constants_rejects_clipped_linear():
    with pytest.raises(ConfigError):
        link_constants(CLIPPED)


def test_link_constants_invariant():
    with pytest.raises(ConfigError):
        LinkConstants(lipschitz_L=1.0, m_mu=0.0)
    with pytest.raises(ConfigError):
        LinkConstants(lipschitz_L=0.1, m_mu=0.2)


def test_unknown_link_kind_rejected():
    with pytest.raises(ConfigError):
        LinkFunctionSpec("relu")


def test_cascade_payoff():
    assert cascade_payoff([0, 0, 0]) == 0
    assert cascade_payoff([0, 1]) == 1
    assert cascade_payoff([1]) == 1
    assert cascade_payoff([]) == 0
    with pytest.raises(ValueError):
        cascade_payoff([0, 2])


def test_expected_cascade_payoff():
    assert expected_cascade_payoff([0.5, 0.5]) == pytest.approx(0.75)
    assert expected_cascade_payoff([1.0, 0.0]) == 1.0
    assert expected_cascade_payoff([]) == 0.0
    with pytest.raises(ValueError):
        expected_cascade_payoff([1.2])
    with pytest.raises(ValueError):
        expected_cascade_payoff([-0.1])


def test_cascade_matches_expected_on_binary(rng):
    for _ in range(200):
        bits = rng.integers(0, 2, rng.integers(0, 6)).tolist()
        assert cascade_payoff(bits) == expected_cascade_payoff([float(b) for b in bits])


def test_appending_never_decreases_expected(rng):
    for _ in range(200):
        probs = rng.random(rng.integers(0, 5)).tolist()
        extra = float(rng.random())
        assert expected_cascade_payoff(probs + [extra]) >= expected_cascade_payoff(probs) - 1e-15


def test_expected_cascade_brute_force(rng):
    # enumeration oracle: sum over all outcome vectors of P(outcome) * aggregate
    for _ in range(50):
        probs = rng.random(rng.integers(1, 5))
        total = 0.0
        for mask in range(2 ** len(probs)):
            bits = [(mask >> i) & 1 for i in range(len(probs))]
            weight = math.prod(p if b else 1 - p for p, b in zip(probs, bits))
            total += weight * cascade_payoff(bits)
        assert expected_cascade_payoff(probs) == pytest.approx(total, abs=1e-12)
