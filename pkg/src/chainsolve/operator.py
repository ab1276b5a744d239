"""Price-update operators for the subcontracting problem.

The deterministic operator maps a candidate price schedule p to

    (T p)(s) = min over t <= s, k in {1, ..., k_bar} of
               c(s - t) + g(k) + delta * k * p(t / k),

the cheapest way for a firm at stage s to finish production given that
upstream work is bought at schedule p.  The stochastic counterpart replaces
the exact partner count k by a search effort lambda: k - 1 is Poisson with
mean lambda, and the firm minimizes the expected purchase cost.

Price schedules live on a uniform grid over [0, 1] and are queried off-grid
by piecewise-linear interpolation.  The subcontracted amount t is searched
over grid multiples of the step h, consistent with that representation.
Finite search bounds k_bar and lambda_bar make the minimizations exhaustive
without changing any minimizer: partner counts with g(k) > c(1) and efforts
with expected partnership cost above c(1) are always dominated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .model import DomainError, ModelSpec

COARSE_LAMBDA_STEP = 0.1
LAMBDA_BAR_GRID_STEP = 0.01
TERNARY_ITERATIONS = 40
SERIES_TAIL_TOLERANCE = 1e-10


# ---------------------------------------------------------------------------
# price schedules on a uniform grid


@dataclass
class PriceFunction:
    """Piecewise-linear price schedule on the uniform grid {0, h, ..., 1}."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValueError("price schedule needs at least two grid values")
        if self.values[0] != 0.0:
            raise ValueError("price at stage 0 must be 0")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0.0):
            raise ValueError("price values must be finite and nonnegative")

    @property
    def m(self) -> int:
        return len(self.values) - 1

    @property
    def grid_step(self) -> float:
        return 1.0 / self.m

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    def at(self, x):
        """Piecewise-linear interpolation at x in [0, 1] (scalar or array)."""
        out = _interp(self.values, self.m, x)
        return float(out) if np.ndim(x) == 0 else out

    __call__ = at


def _interp(values: np.ndarray, m: int, x):
    """Linear interpolation on the uniform grid, exact at grid points."""
    pos = np.asarray(x, dtype=float) * m
    idx = np.clip(pos.astype(np.int64), 0, m - 1)
    frac = pos - idx
    return values[idx] + frac * (values[idx + 1] - values[idx])


@dataclass
class Policy:
    """Per-grid-point minimizers of the operator objective.

    t_star[i] is the subcontracted amount chosen at stage i*h; the partner
    side is k_star (deterministic) or lambda_star (stochastic).  Ties are
    broken toward the smallest k (or lambda), then the smallest t.
    """

    mode: str
    t_star: np.ndarray
    k_star: np.ndarray | None = None
    lambda_star: np.ndarray | None = None


@dataclass(frozen=True)
class Bounds:
    """Finite search bounds for the partner-side minimization."""

    k_bar: int
    lambda_bar: float


# ---------------------------------------------------------------------------
# search bounds


def compute_k_bar(model: ModelSpec) -> int:
    """Smallest k >= 1 with g(k) > c(1).

    Any partner count at or above this threshold costs more in partnership
    fees alone than producing the whole good in-house, so restricting the
    search to k < k_bar leaves every minimizer unchanged.
    """
    c1 = model.cost_ceiling
    g = model.g_values
    hi = 2
    while not g(hi) > c1:
        hi *= 2
    lo = 1  # g(1) = 0 <= c1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) > c1:
            hi = mid
        else:
            lo = mid
    return hi


def compute_lambda_bar(model: ModelSpec) -> float:
    """Smallest lambda on the 0.01 grid with (1/2) g(lambda - ln 2 + 1) >= c(1).

    The shifted-Poisson median sits at or above lambda - ln 2 + 1, so at
    least half the probability mass lies on partner counts k with
    g(k) >= g(lambda - ln 2 + 1).  Beyond this lambda the expected
    partnership cost alone exceeds c(1) and larger efforts are dominated.
    """
    c1 = model.cost_ceiling

    def satisfied(j: int) -> bool:
        lam = j * LAMBDA_BAR_GRID_STEP
        arg = lam - math.log(2.0) + 1.0
        if arg < 1.0:
            return False
        return 0.5 * float(model.g_values(arg)) >= c1

    hi = 1
    while not satisfied(hi):
        hi *= 2
    lo = 0
    while hi - lo > 1:  # bound is monotone in lambda for both g families
        mid = (lo + hi) // 2
        if satisfied(mid):
            hi = mid
        else:
            lo = mid
    return hi * LAMBDA_BAR_GRID_STEP


def compute_bounds(model: ModelSpec) -> Bounds:
    return Bounds(k_bar=compute_k_bar(model), lambda_bar=compute_lambda_bar(model))


# ---------------------------------------------------------------------------
# order-interval envelopes


def make_u0(model: ModelSpec, m: int) -> PriceFunction:
    """Lower envelope c'(0) * s on an m-step grid."""
    if m < 1:
        raise ValueError("grid size must be >= 1")
    return PriceFunction(model.origin_slope * np.linspace(0.0, 1.0, m + 1))


def make_v0(model: ModelSpec, m: int) -> PriceFunction:
    """Upper envelope c(s) on an m-step grid."""
    if m < 1:
        raise ValueError("grid size must be >= 1")
    return PriceFunction(model.cost_values(np.linspace(0.0, 1.0, m + 1)))


# ---------------------------------------------------------------------------
# shifted Poisson machinery


def poisson_pmf(k, lam) -> float | np.ndarray:
    """Probability of k partners under search effort lam.

    k - 1 is Poisson with mean lam; lam = 0 yields a single partner with
    certainty.  k may be a scalar or an integer array.
    """
    karr = np.asarray(k)
    if np.any(karr < 1):
        raise DomainError(f"partner count must be >= 1: {k}")
    if lam < 0.0:
        raise DomainError(f"search effort must be >= 0: {lam}")
    out = stats.poisson.pmf(karr - 1, lam)
    return float(out) if np.ndim(k) == 0 else out


def _pmf_row(karr: np.ndarray, lam: float) -> np.ndarray:
    """Shifted-Poisson pmf over an integer vector, log-space for stability."""
    if lam == 0.0:
        return (karr == 1).astype(float)
    return np.exp((karr - 1) * math.log(lam) - lam - gammaln(karr))


def series_cutoff(lam: float) -> int:
    """Truncation point for expectation series: tail mass < 1e-12."""
    return int(math.ceil(lam + 12.0 * math.sqrt(lam + 1.0) + 30.0))


def certify_truncation(model: ModelSpec, lam_max: float, price_ceiling: float) -> float:
    """One-time tail-bound check for the expectation series truncation.

    Bounds the truncated tail of sum_k f(k; lam) * [g(k) + delta*k*P] for a
    ladder of efforts up to lam_max, with P an upper bound on prices.
    Returns the worst tail found; raises if it exceeds the certified 1e-10.
    """
    worst = 0.0
    ladder = [x for x in (0.1, 1.0, 2.5, 10.0, 100.0, 1e3, 1e4) if x <= lam_max]
    ladder.append(lam_max)
    for lam in ladder:
        cut = series_cutoff(lam)
        karr = np.arange(cut + 1, cut + 501)
        f = _pmf_row(karr, lam)
        weights = model.g_values(karr) + model.delta * karr * price_ceiling
        tail = float(f @ weights)
        # terms beyond the probe window shrink at least geometrically: the
        # pmf ratio lam/k is < 1/2 there, while the weights grow polynomially
        tail += 2.0 * float(f[-1] * weights[-1])
        worst = max(worst, tail)
    if worst > SERIES_TAIL_TOLERANCE:
        raise AssertionError(f"series truncation tail {worst:g} above 1e-10")
    return worst


def expected_upstream_cost(model: ModelSpec, p: PriceFunction, t: float, lam: float) -> float:
    """E[g(k) + delta * k * p(t/k)] under search effort lam.

    Truncated at series_cutoff(lam); lam = 0 reduces exactly to
    g(1) + delta * p(t).
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"subcontracted amount outside [0, 1]: {t}")
    if lam < 0.0:
        raise DomainError(f"search effort must be >= 0: {lam}")
    if lam == 0.0:
        return model.delta * p.at(t)  # g(1) = 0
    karr = np.arange(1, series_cutoff(lam) + 1)
    weights = model.g_values(karr) + model.delta * karr * _interp(p.values, p.m, t / karr)
    return float(_pmf_row(karr, lam) @ weights)


def _expected_cost_from_weights(weights: np.ndarray, karr: np.ndarray, lam: float) -> float:
    """Series value for precomputed weights g(k) + delta*k*p(t/k)."""
    if lam == 0.0:
        return float(weights[0])
    cut = min(series_cutoff(lam), len(karr))
    return float(_pmf_row(karr[:cut], lam) @ weights[:cut])


# ---------------------------------------------------------------------------
# deterministic kernel


def _upstream_table_det(model: ModelSpec, values: np.ndarray, k_bar: int):
    """U[j] = min_k g(k) + delta*k*p(j*h/k) for every grid index j.

    Scans k in ascending order and stops once g(k) alone dominates every
    running minimum; g is increasing, so no later k can improve any entry.
    """
    m = len(values) - 1
    delta = model.delta
    tgrid = np.linspace(0.0, 1.0, m + 1)
    U = delta * values.copy()  # k = 1: g(1) = 0 and p on-grid
    kbest = np.ones(m + 1, dtype=np.int64)
    ceiling = U.max()
    for k in range(2, k_bar + 1):
        gk = float(model.g_values(k))
        if gk >= ceiling:
            break
        obj = gk + delta * k * _interp(values, m, tgrid / k)
        better = obj < U
        if better.any():
            U[better] = obj[better]
            kbest[better] = k
            ceiling = U.max()
    return U, kbest


def _upstream_det_single(model, values, m, j, karr, garr):
    """Deterministic upstream minimum at a single grid index j."""
    delta = model.delta
    t = j / m
    best = delta * values[j]
    kb = 1
    lo = 1  # karr offset: karr[lo] is the next k to examine
    n = len(karr)
    while lo < n and garr[lo] < best:
        hi = min(lo + 64, n)
        chunk = karr[lo:hi]
        obj = garr[lo:hi] + delta * chunk * _interp(values, m, t / chunk)
        i = int(np.argmin(obj))
        if obj[i] < best:
            best = float(obj[i])
            kb = int(chunk[i])
        lo = hi
    return best, kb


def _minplus(cvec: np.ndarray, U: np.ndarray, aux: np.ndarray | None = None, block: int = 512):
    """out[i] = min over j <= i of cvec[i - j] + U[j], with argmin.

    When aux is given, exact ties are re-picked toward the smallest
    (aux[j], j) so that argmins favor the smallest k (or effort), then the
    smallest subcontracted amount; otherwise the first minimizing j wins.
    """
    m = len(U) - 1
    ext = np.concatenate([cvec[::-1], np.full(m, np.inf)])
    windows = np.lib.stride_tricks.sliding_window_view(ext, m + 1)
    out = np.empty(m + 1)
    jarg = np.empty(m + 1, dtype=np.int64)
    for lo in range(0, m + 1, block):
        hi = min(lo + block, m + 1)
        rows = windows[m - hi + 1 : m - lo + 1][::-1] + U[None, :]
        mins = rows.min(axis=1)
        out[lo:hi] = mins
        jarg[lo:hi] = rows.argmin(axis=1)
        if aux is not None:
            tied = rows == mins[:, None]
            multi = np.nonzero(tied.sum(axis=1) > 1)[0]
            for r in multi:
                js = np.nonzero(tied[r])[0]
                jarg[lo + r] = min(js, key=lambda j: (aux[j], j))
    return out, jarg


def _minplus_values(cvec: np.ndarray, U: np.ndarray, block: int = 512) -> np.ndarray:
    """Value-only variant of _minplus for iteration hot loops."""
    m = len(U) - 1
    ext = np.concatenate([cvec[::-1], np.full(m, np.inf)])
    windows = np.lib.stride_tricks.sliding_window_view(ext, m + 1)
    out = np.empty(m + 1)
    for lo in range(0, m + 1, block):
        hi = min(lo + block, m + 1)
        rows = windows[m - hi + 1 : m - lo + 1][::-1] + U[None, :]
        out[lo:hi] = rows.min(axis=1)
    return out


def _apply_det(model: ModelSpec, values: np.ndarray, k_bar: int, want_policy: bool):
    m = len(values) - 1
    cvec = model.cost_values(np.linspace(0.0, 1.0, m + 1))
    U, kbest = _upstream_table_det(model, values, k_bar)
    if not want_policy:
        return _minplus_values(cvec, U), None, None
    out, jarg = _minplus(cvec, U, aux=kbest)
    return out, jarg, (U, kbest)


def apply_T(model: ModelSpec, p: PriceFunction, k_bar: int | None = None):
    """One application of the deterministic operator.

    Returns the updated PriceFunction and the Policy of minimizers.
    """
    if k_bar is None:
        k_bar = compute_k_bar(model)
    out, jarg, aux = _apply_det(model, p.values, k_bar, want_policy=True)
    out[0] = 0.0
    m = p.m
    tgrid = np.linspace(0.0, 1.0, m + 1)
    U, kbest = aux
    policy = Policy(
        mode="deterministic",
        t_star=tgrid[jarg],
        k_star=kbest[jarg],
    )
    return PriceFunction(out), policy


# ---------------------------------------------------------------------------
# stochastic kernel


@dataclass
class _StochTables:
    """Precomputed coarse-effort expectation tables for one model."""

    lambda_bar: float
    c1: float
    lam_grid: np.ndarray   # coarse efforts 0, 0.1, ...
    Eg: np.ndarray         # expected partnership cost per coarse effort
    Mk: np.ndarray         # pmf * k matrix, rows truncated at their cutoff
    karr: np.ndarray       # 1..kmax
    garr: np.ndarray = field(repr=False, default=None)


def _build_stoch_tables(model: ModelSpec, lambda_bar: float) -> _StochTables:
    n = int(math.floor(lambda_bar / COARSE_LAMBDA_STEP)) + 1
    lam_grid = np.arange(n) * COARSE_LAMBDA_STEP
    cutoffs = np.ceil(lam_grid + 12.0 * np.sqrt(lam_grid + 1.0) + 30.0).astype(int)
    kmax = int(cutoffs.max())
    karr = np.arange(1, kmax + 1)
    garr = np.asarray(model.g_values(karr), dtype=float)
    with np.errstate(divide="ignore"):
        loglam = np.where(lam_grid > 0.0, np.log(lam_grid), 0.0)
    logf = (karr - 1)[None, :] * loglam[:, None] - lam_grid[:, None] - gammaln(karr)[None, :]
    F = np.exp(logf)
    F[0] = 0.0
    F[0, 0] = 1.0  # lam = 0: single partner with certainty
    # zero out terms beyond each row's own truncation so that enlarging
    # lambda_bar leaves shared rows bit-identical
    F[karr[None, :] > cutoffs[:, None]] = 0.0
    Eg = F @ garr
    Mk = F * karr[None, :]
    certify_truncation(model, lambda_bar, model.cost_ceiling)
    return _StochTables(
        lambda_bar=lambda_bar,
        c1=model.cost_ceiling,
        lam_grid=lam_grid,
        Eg=Eg,
        Mk=Mk,
        karr=karr,
        garr=garr,
    )


def _upstream_stoch_single(model, tables: _StochTables, values, m, j):
    """Coarse scan plus ternary refinement of the effort at grid index j.

    The coarse scan walks efforts upward and stops at the first one whose
    objective exceeds the running best by c(1); the expected partnership
    cost is increasing in lambda, so everything beyond is dominated.
    """
    delta = model.delta
    t = j / m
    pvec = _interp(values, m, t / tables.karr)
    col = tables.Eg + delta * (tables.Mk @ pvec)
    running = np.minimum.accumulate(col)
    exceed = col[1:] > running[:-1] + tables.c1
    stop = int(np.argmax(exceed)) + 1 if exceed.any() else len(col) - 1
    ib = int(np.argmin(col[: stop + 1]))
    lam_coarse = float(tables.lam_grid[ib])

    weights = tables.garr + delta * tables.karr * pvec
    lo = max(0.0, lam_coarse - COARSE_LAMBDA_STEP)
    hi = min(tables.lambda_bar, lam_coarse + COARSE_LAMBDA_STEP)
    for _ in range(TERNARY_ITERATIONS):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if _expected_cost_from_weights(weights, tables.karr, m1) <= _expected_cost_from_weights(
            weights, tables.karr, m2
        ):
            hi = m2
        else:
            lo = m1
    lam_fine = 0.5 * (lo + hi)
    # store the canonical series value so policies re-evaluate bit-identically
    val_coarse = _expected_cost_from_weights(weights, tables.karr, lam_coarse)
    val_fine = _expected_cost_from_weights(weights, tables.karr, lam_fine)
    if val_fine < val_coarse:
        return val_fine, lam_fine
    return val_coarse, lam_coarse


def _apply_stoch(model: ModelSpec, values: np.ndarray, tables: _StochTables, want_policy: bool):
    m = len(values) - 1
    cvec = model.cost_values(np.linspace(0.0, 1.0, m + 1))
    U = np.empty(m + 1)
    lam = np.empty(m + 1)
    for j in range(m + 1):
        U[j], lam[j] = _upstream_stoch_single(model, tables, values, m, j)
    if not want_policy:
        return _minplus_values(cvec, U), None, None
    out, jarg = _minplus(cvec, U, aux=lam)
    return out, jarg, (U, lam)


def apply_T_stochastic(model: ModelSpec, p: PriceFunction, lambda_bar: float | None = None):
    """One application of the stochastic operator (search-effort variant)."""
    if lambda_bar is None:
        lambda_bar = compute_lambda_bar(model)
    tables = _build_stoch_tables(model, lambda_bar)
    out, jarg, aux = _apply_stoch(model, p.values, tables, want_policy=True)
    out[0] = 0.0
    tgrid = np.linspace(0.0, 1.0, p.m + 1)
    U, lam = aux
    policy = Policy(
        mode="stochastic",
        t_star=tgrid[jarg],
        lambda_star=lam[jarg],
    )
    return PriceFunction(out), policy
