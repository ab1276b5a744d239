"""Shared fixtures: the standard models and a bounded random-model sampler."""

import warnings

import numpy as np
import pytest

import chainsolve as cs


@pytest.fixture(scope="session")
def fig1_model():
    """c(s) = e^{10s} - 1, g(k) = 50(k - 1), delta = 10."""
    return cs.model_from("exp_affine", 10.0, 10.0, "linear", 50.0)


@pytest.fixture(scope="session")
def fig4a_model():
    """c(s) = s^1.2, g(k) = 0.0005 (k - 1)^1.5, delta = 1.05."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cs.ZeroOriginSlopeWarning)
        return cs.model_from("power", 1.2, 1.05, "power", 0.0005, gamma=1.5)


@pytest.fixture(scope="session")
def fig4b_model():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cs.ZeroOriginSlopeWarning)
        return cs.model_from("power", 1.2, 1.1, "power", 0.0005, gamma=1.5)


@pytest.fixture(scope="session")
def small_model():
    """c(s) = e^s - 1, g(k) = 0.01(k - 1), delta = 2: cheap and well-behaved."""
    return cs.model_from("exp_affine", 1.0, 2.0, "linear", 0.01)


_FAMILIES = ("exp_affine", "power", "poly_affine", "exp_plus_square", "exp_square")


def random_model(rng: np.random.Generator, max_delta: float = 5.0) -> cs.ModelSpec:
    """Sample a validated model within the parametric family bounds.

    beta is scaled to c(1) so the search bounds k_bar and lambda_bar stay
    small enough for quick solves.
    """
    family = _FAMILIES[rng.integers(len(_FAMILIES))]
    if family == "exp_affine":
        param = float(rng.uniform(0.3, 3.0))
    elif family == "power":
        param = float(rng.uniform(1.05, 2.5))
    else:
        param = None
    delta = float(rng.uniform(1.02, max_delta))
    g_family = "linear" if rng.random() < 0.5 else "power"
    gamma = 1.0 if g_family == "linear" else float(rng.uniform(1.0, 2.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cs.ZeroOriginSlopeWarning)
        probe = cs.model_from(family, param, delta, "linear", 1.0)
        beta = float(probe.cost_ceiling * rng.uniform(0.1, 2.0))
        return cs.model_from(family, param, delta, g_family, beta, gamma=gamma)


def random_price_between(rng, u0: cs.PriceFunction, v0: cs.PriceFunction) -> cs.PriceFunction:
    """Random schedule inside the order interval, zero at the origin."""
    w = rng.random(len(u0.values))
    w[0] = 0.0
    return cs.PriceFunction(u0.values + w * (v0.values - u0.values))


def zero_profit_gap(solution) -> float:
    """Worst gap between grid prices and the objective at the stored policy."""
    model = solution.model
    price = solution.price
    grid = price.grid()
    pol = solution.policy
    worst = 0.0
    for i in range(1, price.m + 1):
        t = pol.t_star[i]
        in_house = float(model.cost_values(grid[i] - t))
        if pol.mode == "deterministic":
            k = int(pol.k_star[i])
            obj = in_house + float(model.g_values(k)) + model.delta * k * price.at(t / k)
        else:
            obj = in_house + cs.expected_upstream_cost(
                model, price, t, float(pol.lambda_star[i])
            )
        worst = max(worst, abs(price.values[i] - obj))
    return worst
