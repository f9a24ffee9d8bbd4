"""Shared fixtures: the reference three-node calibration and random instances.

The reference calibration (used throughout the tests and the acceptance
suite): three nodes with weights (w12, w13, w23) = (0.04, 0.03, 0.05),
technology A = (0.10, 0.12, 0.08), rho = 0.03, gamma = 3, uniform preference
weights, unit initial capital.

``random_network`` draws instances that satisfy every planner precondition
(connected graph, positive data, gamma != 1, rho > lambda0*(1-gamma)); the
dominant eigenvalue used to pick a valid rho comes from numpy.linalg.eigvalsh,
independent of the library's own eigensolver.
"""

from __future__ import annotations

import numpy as np
import pytest

import growthnet as gn

BASE = dict(
    n=3,
    upper_weights=(0.04, 0.03, 0.05),
    technology=(0.10, 0.12, 0.08),
    rho=0.03,
    gamma=3.0,
    pref_weights=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
    initial_capital=(1.0, 1.0, 1.0),
)


def make_base_network(**overrides) -> gn.EconomyNetwork:
    params = {**BASE, **overrides}
    return gn.EconomyNetwork.from_upper_triangle(**params)


def vary_w13(w13: float) -> gn.EconomyNetwork:
    """Base calibration with the 1-3 coupling replaced."""
    return make_base_network(upper_weights=(0.04, float(w13), 0.05))


def random_network(rng: np.random.Generator, n: int | None = None,
                   gamma_choices=(0.5, 2.0, 3.0)) -> gn.EconomyNetwork:
    """A random connected instance satisfying every planner precondition."""
    if n is None:
        n = int(rng.integers(2, 5))
    upper = rng.uniform(0.005, 0.08, size=n * (n - 1) // 2)
    technology = rng.uniform(0.03, 0.15, size=n)
    gamma = float(rng.choice(gamma_choices))
    W = np.zeros((n, n))
    W[np.triu_indices(n, k=1)] = upper
    W += W.T
    L = W - np.diag(W.sum(axis=1))
    lam0 = float(np.linalg.eigvalsh(L + np.diag(technology))[-1])
    rho = max(lam0 * (1.0 - gamma), 0.0) + float(rng.uniform(0.01, 0.08))
    p = rng.uniform(0.2, 1.0, size=n)
    p /= p.sum()
    k = rng.uniform(0.2, 2.0, size=n)
    return gn.EconomyNetwork.from_upper_triangle(
        n=n, upper_weights=upper, technology=technology, rho=rho, gamma=gamma,
        pref_weights=p, initial_capital=k)


@pytest.fixture(scope="session")
def base_net() -> gn.EconomyNetwork:
    return make_base_network()


@pytest.fixture(scope="session")
def base_dec(base_net) -> gn.SpectralDecomposition:
    return gn.eig_symmetric(gn.system_matrix(base_net))


@pytest.fixture(scope="session")
def base_plan(base_net, base_dec) -> gn.ExplicitPlan:
    return gn.build_plan(base_net, base_dec)
