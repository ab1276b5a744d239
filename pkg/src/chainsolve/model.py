"""Economic primitives: in-house cost families and transaction cost specs.

A model consists of a production cost function c on [0, 1] (strictly
increasing, strictly convex, c(0) = 0), a proportional transaction cost
coefficient delta > 1 applied to every upstream purchase, and an additive
partnership cost g on {1, 2, ...} with g(1) = 0, strictly increasing and
unbounded.  Cost functions are a closed set of parametric families so that
validation stays exact and configs stay declarative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

VALIDATION_GRID_SIZE = 1000

# Slope floor substituted for c'(0) when a family has zero derivative at the
# origin (power with theta > 1, exp_square).  The linear lower envelope then
# degenerates to ~0, which is still a valid lower bound since prices are
# nonnegative.
ORIGIN_SLOPE_FLOOR = 1e-12

COST_FAMILIES = ("exp_affine", "power", "poly_affine", "exp_plus_square", "exp_square")
G_FAMILIES = ("linear", "power")


class ChainsolveError(Exception):
    """Base class for all library errors."""


class UnknownFamilyError(ChainsolveError):
    """A cost or transaction family name is not recognized."""


class ParameterOutOfRangeError(ChainsolveError):
    """A family parameter violates its admissible range."""


class AssumptionViolatedError(ChainsolveError):
    """Numeric monotonicity/convexity validation failed."""

    def __init__(self, message: str, grid_point: float | None = None):
        super().__init__(message)
        self.grid_point = grid_point


class DomainError(ChainsolveError):
    """An evaluation argument lies outside the function's domain."""


class ZeroOriginSlopeWarning(UserWarning):
    """c'(0) = 0: the linear lower envelope degenerates to zero."""


@dataclass(frozen=True)
class CostSpec:
    """Parametric in-house cost family.

    Families: exp_affine c(s)=e^{a s}-1, power c(s)=s^theta,
    poly_affine c(s)=s^2+s, exp_plus_square c(s)=e^s+s^2-1,
    exp_square c(s)=e^{s^2}-1.  Only exp_affine (a) and power (theta)
    carry a parameter.
    """

    family: str
    param: float | None = None

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "exp_affine":
            return np.expm1(self.param * x)
        if self.family == "power":
            return x**self.param
        if self.family == "poly_affine":
            return x * x + x
        if self.family == "exp_plus_square":
            return np.exp(x) + x * x - 1.0
        if self.family == "exp_square":
            return np.expm1(x * x)
        raise UnknownFamilyError(f"unknown cost family {self.family!r}")

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "exp_affine":
            return self.param * np.exp(self.param * x)
        if self.family == "power":
            return self.param * x ** (self.param - 1.0)
        if self.family == "poly_affine":
            return 2.0 * x + 1.0
        if self.family == "exp_plus_square":
            return np.exp(x) + 2.0 * x
        if self.family == "exp_square":
            return 2.0 * x * np.exp(x * x)
        raise UnknownFamilyError(f"unknown cost family {self.family!r}")

    @property
    def origin_slope_exact(self) -> float:
        """c'(0) by the closed form (0.0 for the degenerate families)."""
        if self.family == "exp_affine":
            return float(self.param)
        if self.family == "power":
            # theta > 1 after validation, so s^(theta-1) -> 0 at the origin
            return 0.0
        if self.family in ("poly_affine", "exp_plus_square"):
            return 1.0
        if self.family == "exp_square":
            return 0.0
        raise UnknownFamilyError(f"unknown cost family {self.family!r}")


@dataclass(frozen=True)
class TransactionSpec:
    """Proportional coefficient delta and additive partnership cost g."""

    delta: float
    g_family: str
    beta: float
    gamma: float = 1.0

    def g_value(self, k):
        """g evaluated at real argument k >= 1 (integer in the model)."""
        k = np.asarray(k, dtype=float)
        if self.g_family == "linear":
            return self.beta * (k - 1.0)
        if self.g_family == "power":
            return self.beta * (k - 1.0) ** self.gamma
        raise UnknownFamilyError(f"unknown g family {self.g_family!r}")


@dataclass(frozen=True)
class ModelSpec:
    """Validated model: immutable, safe for unrestricted concurrent use."""

    cost: CostSpec
    transaction: TransactionSpec

    @property
    def delta(self) -> float:
        return self.transaction.delta

    @property
    def cost_ceiling(self) -> float:
        """c(1), the all-in-house price of the final good."""
        return float(self.cost.value(1.0))

    @property
    def origin_slope(self) -> float:
        """c'(0) with the floor substitution for degenerate families."""
        exact = self.cost.origin_slope_exact
        return exact if exact > 0.0 else ORIGIN_SLOPE_FLOOR

    def cost_values(self, x):
        """c(x) without domain checks; callers keep x inside [0, 1]."""
        return self.cost.value(x)

    def cost_derivative(self, x):
        return self.cost.derivative(x)

    def g_values(self, k):
        return self.transaction.g_value(k)

    def describe(self) -> dict:
        """Round-trippable config block for file headers and echoes."""
        cost: dict = {"family": self.cost.family}
        if self.cost.family == "exp_affine":
            cost["a"] = self.cost.param
        elif self.cost.family == "power":
            cost["theta"] = self.cost.param
        g: dict = {"family": self.transaction.g_family, "beta": self.transaction.beta}
        if self.transaction.g_family == "power":
            g["gamma"] = self.transaction.gamma
        return {"cost": cost, "delta": self.transaction.delta, "g": g}


def _validate_cost(spec: CostSpec) -> None:
    if spec.family not in COST_FAMILIES:
        raise UnknownFamilyError(f"unknown cost family {spec.family!r}")
    if spec.family == "exp_affine":
        if spec.param is None or spec.param <= 0.0:
            raise ParameterOutOfRangeError("exp_affine requires a > 0")
    elif spec.family == "power":
        if spec.param is None or spec.param <= 0.0:
            raise ParameterOutOfRangeError("power requires theta > 0")
    elif spec.param is not None:
        raise ParameterOutOfRangeError(f"{spec.family} takes no parameter")

    xs = np.linspace(0.0, 1.0, VALIDATION_GRID_SIZE)
    cx = spec.value(xs)
    if not np.all(np.isfinite(cx)):
        bad = xs[~np.isfinite(cx)][0]
        raise AssumptionViolatedError(f"c not finite at s={bad}", grid_point=float(bad))
    if cx[0] != 0.0:
        raise AssumptionViolatedError("c(0) != 0", grid_point=0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        dx = spec.derivative(xs)
    if not np.all(np.isfinite(dx[1:])):
        bad = xs[1:][~np.isfinite(dx[1:])][0]
        raise AssumptionViolatedError(f"c' not finite at s={bad:g}", grid_point=float(bad))
    dx[0] = spec.origin_slope_exact  # closed form, avoids 0^negative at s=0
    # strictly increasing: c' > 0 away from the origin
    pos = dx[1:] > 0.0
    if not np.all(pos):
        bad = xs[1:][~pos][0]
        raise AssumptionViolatedError(
            f"c'({bad:g}) <= 0: cost not strictly increasing", grid_point=float(bad)
        )
    # strictly convex: c' strictly increasing across the validation grid
    steps = np.diff(dx)
    convex = steps > 1e-12
    if not np.all(convex):
        bad = xs[1:][~convex][0]
        raise AssumptionViolatedError(
            f"c' not strictly increasing near s={bad:g}: cost not strictly convex",
            grid_point=float(bad),
        )
    if spec.origin_slope_exact <= 0.0:
        warnings.warn(
            f"cost family {spec.family!r} has c'(0) = 0; the linear lower "
            f"envelope degenerates to ~0 (slope floor {ORIGIN_SLOPE_FLOOR:g})",
            ZeroOriginSlopeWarning,
            stacklevel=3,
        )


def _validate_transaction(spec: TransactionSpec) -> None:
    if spec.g_family not in G_FAMILIES:
        raise UnknownFamilyError(f"unknown g family {spec.g_family!r}")
    if not spec.delta > 1.0:
        raise ParameterOutOfRangeError(f"delta must be > 1, got {spec.delta}")
    if not spec.beta > 0.0:
        raise ParameterOutOfRangeError(f"beta must be > 0, got {spec.beta}")
    if spec.g_family == "power" and not spec.gamma >= 1.0:
        raise ParameterOutOfRangeError(f"gamma must be >= 1, got {spec.gamma}")
    if spec.g_value(1.0) != 0.0:
        raise AssumptionViolatedError("g(1) != 0")
    if not spec.g_value(2.0) > 0.0:
        raise AssumptionViolatedError("g(2) <= 0: g not strictly increasing")


def make_model(config: dict) -> ModelSpec:
    """Build and validate a ModelSpec from a parsed configuration record.

    Expected shape::

        {"cost": {"family": "exp_affine", "a": 10},
         "delta": 10,
         "g": {"family": "linear", "beta": 50}}

    Raises UnknownFamilyError, ParameterOutOfRangeError or
    AssumptionViolatedError; emits ZeroOriginSlopeWarning for families
    with c'(0) = 0 (power with theta > 1, exp_square).
    """
    try:
        cost_cfg = dict(config["cost"])
        g_cfg = dict(config["g"])
        delta = float(config["delta"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterOutOfRangeError(f"malformed model config: {exc}") from exc

    family = cost_cfg.get("family")
    if family == "exp_affine":
        param = cost_cfg.get("a")
    elif family == "power":
        param = cost_cfg.get("theta")
    else:
        param = None
    if param is not None:
        param = float(param)
    if family in ("exp_affine", "power") and param is None:
        raise ParameterOutOfRangeError(f"cost family {family!r} requires a parameter")
    cost = CostSpec(family=str(family), param=param)

    g_family = str(g_cfg.get("family"))
    beta = g_cfg.get("beta")
    if beta is None:
        raise ParameterOutOfRangeError("g requires beta")
    gamma = float(g_cfg.get("gamma", 1.0))
    transaction = TransactionSpec(
        delta=delta, g_family=g_family, beta=float(beta), gamma=gamma
    )

    _validate_cost(cost)
    _validate_transaction(transaction)
    return ModelSpec(cost=cost, transaction=transaction)


def model_from(
    cost_family: str,
    cost_param: float | None,
    delta: float,
    g_family: str,
    beta: float,
    gamma: float = 1.0,
) -> ModelSpec:
    """Convenience constructor used by the benchmark suite and tests."""
    cfg: dict = {
        "cost": {"family": cost_family},
        "delta": delta,
        "g": {"family": g_family, "beta": beta, "gamma": gamma},
    }
    if cost_family == "exp_affine":
        cfg["cost"]["a"] = cost_param
    elif cost_family == "power":
        cfg["cost"]["theta"] = cost_param
    return make_model(cfg)


def eval_cost(model: ModelSpec, x):
    """c(x) for x in [0, 1]; raises DomainError outside."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"cost argument outside [0, 1]: {x}")
    out = model.cost.value(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def eval_cost_derivative(model: ModelSpec, x):
    """c'(x) for x in [0, 1]; raises DomainError outside."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"cost argument outside [0, 1]: {x}")
    out = model.cost.derivative(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def eval_g(model: ModelSpec, k):
    """g(k) for integer k >= 1; raises DomainError for k < 1."""
    arr = np.asarray(k)
    if np.any(arr < 1):
        raise DomainError(f"partner count must be >= 1: {k}")
    out = model.transaction.g_value(arr)
    return float(out) if np.isscalar(k) or arr.ndim == 0 else out
