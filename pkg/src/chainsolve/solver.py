"""Equilibrium price computation by operator iteration or forward recursion.

Method 1 ("iterate") applies the price-update operator repeatedly starting
from the all-in-house schedule c until successive iterates stop moving.
Method 2 ("recursive") builds the schedule in one forward pass: p(0) = 0,
and each new grid value p(s) minimizes over subcontracted amounts t <= s - h
so that only already-constructed values are ever queried.  Both converge to
the same equilibrium schedule as the grid is refined.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .model import ModelSpec
from .operator import (
    PriceFunction,
    Policy,
    _apply_det,
    _apply_stoch,
    _build_stoch_tables,
    _upstream_det_single,
    _upstream_stoch_single,
    compute_k_bar,
    compute_lambda_bar,
    make_v0,
)

VARIANTS = ("deterministic", "stochastic")
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000


@dataclass
class UpstreamTable:
    """Minimized partner-side cost per grid amount t = j*h.

    values[j] is min over k (or lambda) of g + delta*k*p(t/k) under the
    solved schedule; k/lam hold the minimizers.  Reused by the network
    simulator to re-optimize firms at off-grid stages.
    """

    values: np.ndarray
    k: np.ndarray | None = None
    lam: np.ndarray | None = None


@dataclass
class Solution:
    """Solved price schedule with its policy and convergence diagnostics."""

    price: PriceFunction
    policy: Policy
    method: str
    variant: str
    iterations: int | None
    residual: float | None
    wall_time: float
    model: ModelSpec
    upstream: UpstreamTable


class MaxIterationsExceeded(Exception):
    """Iteration hit the cap before the step size reached tol.

    Carries the last iterate (with its residual) as .solution so callers
    can keep partial results; expected for delta near 1.
    """

    def __init__(self, solution: Solution, tol: float):
        super().__init__(
            f"no convergence after {solution.iterations} iterations: "
            f"residual {solution.residual:.3g} > tol {tol:g}"
        )
        self.solution = solution


def _check_args(m: int, variant: str) -> None:
    if m < 2:
        raise ValueError("grid size must be >= 2")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _tie_argmin(seg: np.ndarray, aux: np.ndarray) -> int:
    """First index of the minimum; exact ties resolved by (aux[j], j)."""
    mn = seg.min()
    cands = np.nonzero(seg == mn)[0]
    if len(cands) == 1:
        return int(cands[0])
    return int(min(cands, key=lambda j: (aux[j], j)))


def solve_recursive(
    model: ModelSpec,
    m: int,
    variant: str = "deterministic",
    k_bar: int | None = None,
    lambda_bar: float | None = None,
    compute_residual: bool = True,
) -> Solution:
    """Forward construction of the price schedule (exactly m minimization steps).

    p(0) = 0; for s = h, 2h, ..., 1 in order, p(s) minimizes over
    t in {0, ..., s - h} with the partner-side minimum looked up from an
    incrementally built table, then the schedule is extended by linear
    interpolation.
    """
    _check_args(m, variant)
    start = time.perf_counter()
    stochastic = variant == "stochastic"
    tgrid = np.linspace(0.0, 1.0, m + 1)
    cvec = np.asarray(model.cost_values(tgrid), dtype=float)

    if stochastic:
        if lambda_bar is None:
            lambda_bar = compute_lambda_bar(model)
        tables = _build_stoch_tables(model, lambda_bar)
        aux = np.zeros(m + 1)  # chosen efforts per t
    else:
        if k_bar is None:
            k_bar = compute_k_bar(model)
        karr = np.arange(1, k_bar + 1)
        garr = np.asarray(model.g_values(karr), dtype=float)
        aux = np.ones(m + 1, dtype=np.int64)  # chosen k per t

    values = np.zeros(m + 1)
    U = np.zeros(m + 1)
    t_star = np.zeros(m + 1)
    choice = np.zeros(m + 1) if stochastic else np.ones(m + 1, dtype=np.int64)

    # t = 0 delegates nothing: the partner-side minimum is 0 at k=1 / lam=0
    for i in range(1, m + 1):
        # extend the partner-side table to t = (i-1)*h, now that p there is known
        j = i - 1
        if stochastic:
            U[j], aux[j] = _upstream_stoch_single(model, tables, values, m, j)
        else:
            U[j], aux[j] = _upstream_det_single(model, values, m, j, karr, garr)
        seg = cvec[1 : i + 1][::-1] + U[:i]
        jstar = _tie_argmin(seg, aux)
        values[i] = seg[jstar]
        t_star[i] = tgrid[jstar]
        choice[i] = aux[jstar]

    # final table entry at t = 1 completes the network simulator's lookup
    if stochastic:
        U[m], aux[m] = _upstream_stoch_single(model, tables, values, m, m)
    else:
        U[m], aux[m] = _upstream_det_single(model, values, m, m, karr, garr)

    wall = time.perf_counter() - start
    price = PriceFunction(values)
    if stochastic:
        policy = Policy(mode="stochastic", t_star=t_star, lambda_star=choice)
        upstream = UpstreamTable(values=U, lam=aux.copy())
    else:
        policy = Policy(mode="deterministic", t_star=t_star, k_star=choice)
        upstream = UpstreamTable(values=U, k=aux.copy())

    res = None
    if compute_residual:
        res = residual(model, price, variant, k_bar=k_bar, lambda_bar=lambda_bar)
    return Solution(
        price=price,
        policy=policy,
        method="recursive",
        variant=variant,
        iterations=None,
        residual=res,
        wall_time=wall,
        model=model,
        upstream=upstream,
    )


def solve_iterative(
    model: ModelSpec,
    m: int,
    variant: str = "deterministic",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    p0: PriceFunction | None = None,
    k_bar: int | None = None,
    lambda_bar: float | None = None,
) -> Solution:
    """Successive operator application from p0 (default: the cost schedule c).

    Stops when the sup-norm step between iterates is <= tol; the returned
    residual is computed with one extra operator application, which also
    supplies the policy.  Raises MaxIterationsExceeded (carrying the last
    iterate) if the cap is hit first.
    """
    _check_args(m, variant)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    start = time.perf_counter()
    stochastic = variant == "stochastic"
    if stochastic:
        if lambda_bar is None:
            lambda_bar = compute_lambda_bar(model)
        tables = _build_stoch_tables(model, lambda_bar)
    else:
        if k_bar is None:
            k_bar = compute_k_bar(model)

    values = (p0 if p0 is not None else make_v0(model, m)).values.copy()
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if stochastic:
            new, _, _ = _apply_stoch(model, values, tables, want_policy=False)
        else:
            new, _, _ = _apply_det(model, values, k_bar, want_policy=False)
        new[0] = 0.0
        step = float(np.abs(new - values).max())
        values = new
        if step <= tol:
            converged = True
            break

    # one extra application: policy, upstream table and residual for the
    # returned iterate
    if stochastic:
        out, jarg, saved = _apply_stoch(model, values, tables, want_policy=True)
    else:
        out, jarg, saved = _apply_det(model, values, k_bar, want_policy=True)
    out[0] = 0.0
    res = float(np.abs(out - values).max())
    tgrid = np.linspace(0.0, 1.0, m + 1)
    if stochastic:
        U, lam = saved
        policy = Policy(mode="stochastic", t_star=tgrid[jarg], lambda_star=lam[jarg])
        upstream = UpstreamTable(values=U, lam=lam)
    else:
        U, kbest = saved
        policy = Policy(mode="deterministic", t_star=tgrid[jarg], k_star=kbest[jarg])
        upstream = UpstreamTable(values=U, k=kbest)

    solution = Solution(
        price=PriceFunction(values),
        policy=policy,
        method="iterate",
        variant=variant,
        iterations=iterations,
        residual=res,
        wall_time=time.perf_counter() - start,
        model=model,
        upstream=upstream,
    )
    if not converged:
        raise MaxIterationsExceeded(solution, tol)
    return solution


def residual(
    model: ModelSpec,
    p: PriceFunction,
    variant: str = "deterministic",
    k_bar: int | None = None,
    lambda_bar: float | None = None,
) -> float:
    """Sup-norm of one operator application minus p on the grid."""
    if variant == "stochastic":
        if lambda_bar is None:
            lambda_bar = compute_lambda_bar(model)
        tables = _build_stoch_tables(model, lambda_bar)
        out, _, _ = _apply_stoch(model, p.values, tables, want_policy=False)
    else:
        if k_bar is None:
            k_bar = compute_k_bar(model)
        out, _, _ = _apply_det(model, p.values, k_bar, want_policy=False)
    out[0] = 0.0
    return float(np.abs(out - p.values).max())


def refine_study(
    model: ModelSpec, variant: str, levels: list[int]
) -> list[tuple[int, float]]:
    """Grid refinement table: sup-distance of each level to the finest one.

    Levels must be strictly increasing with each dividing the next, so that
    coarse grids embed exactly into the finest.  Distances are measured on
    the coarse grid points.
    """
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    for a, b in zip(levels, levels[1:]):
        if not (b > a and b % a == 0):
            raise ValueError(f"levels must increase and divide each other: {a}, {b}")
    solutions = [
        solve_recursive(model, m, variant, compute_residual=False) for m in levels
    ]
    finest = solutions[-1].price.values
    mf = levels[-1]
    table = []
    for m, sol in zip(levels, solutions):
        stride = mf // m
        dist = float(np.abs(sol.price.values - finest[::stride]).max())
        table.append((m, dist))
    return table
