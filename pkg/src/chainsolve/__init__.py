"""Equilibrium prices and firm networks for multi-partner production chains.

Firms on a stage continuum [0, 1] either produce in-house or delegate a
range of stages to upstream partners, paying proportional and additive
transaction costs.  The package solves for the zero-profit price schedule
(deterministic or Poisson search-effort partner choice), simulates the
resulting firm-allocation trees, and benchmarks the one-pass recursive
construction against plain operator iteration.

Submodules load lazily so the CLI can cap thread pools before numpy starts.
"""

from importlib import import_module

_EXPORTS = {
    "model": (
        "CostSpec",
        "TransactionSpec",
        "ModelSpec",
        "make_model",
        "model_from",
        "eval_cost",
        "eval_cost_derivative",
        "eval_g",
        "ChainsolveError",
        "UnknownFamilyError",
        "ParameterOutOfRangeError",
        "AssumptionViolatedError",
        "DomainError",
        "ZeroOriginSlopeWarning",
    ),
    "operator": (
        "PriceFunction",
        "Policy",
        "Bounds",
        "compute_k_bar",
        "compute_lambda_bar",
        "compute_bounds",
        "make_u0",
        "make_v0",
        "apply_T",
        "apply_T_stochastic",
        "poisson_pmf",
        "expected_upstream_cost",
        "certify_truncation",
    ),
    "solver": (
        "Solution",
        "UpstreamTable",
        "MaxIterationsExceeded",
        "solve_iterative",
        "solve_recursive",
        "residual",
        "refine_study",
    ),
    "network": (
        "FirmNode",
        "ProductionNetwork",
        "DepthExceeded",
        "sample_partner_count",
        "simulate_network",
        "network_stats",
        "network_to_dict",
        "network_to_json",
        "network_to_dot",
    ),
    "bench": (
        "BenchCase",
        "BenchRecord",
        "BenchReport",
        "paper_suite",
        "desk_suite",
        "run_benchmark",
    ),
}

_ATTR_TO_MODULE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_ATTR_TO_MODULE)
__version__ = "0.1.0"


def __getattr__(name: str):
    if name in _EXPORTS or name in ("cli", "operator"):
        return import_module(f".{name}", __name__)
    mod = _ATTR_TO_MODULE.get(name)
    if mod is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    return getattr(import_module(f".{mod}", __name__), name)
