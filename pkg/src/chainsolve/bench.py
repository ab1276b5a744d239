"""Timing and accuracy comparison of the two solution methods.

Ten standard settings: five (c, g) pairs, each run at delta = 1.1 and
delta = 1.01.  Every case is solved by operator iteration (method 1) and by
the forward recursion (method 2); wall times are medians over repeated runs
after one warm-up, and sup-norm errors are measured against a much finer
recursive solve.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .model import ModelSpec, model_from
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, MaxIterationsExceeded, solve_iterative, solve_recursive

BENCH_SCHEMA = "chainsolve/bench/1"
CSV_COLUMNS = ("case", "method", "median_seconds", "iterations", "sup_error", "m", "reference_m", "status")

# (name stem, cost family, cost parameter, g family, beta)
_CASE_DEFS = (
    ("model1", "exp_affine", 10.0, "linear", 1.0),
    ("model2", "exp_affine", 1.0, "linear", 0.01),
    ("model3", "exp_square", None, "linear", 0.01),
    ("model4", "poly_affine", None, "linear", 0.01),
    ("model5", "exp_plus_square", None, "linear", 0.05),
)
_DELTAS = (1.1, 1.01)


@dataclass(frozen=True)
class BenchCase:
    name: str
    model: ModelSpec
    m: int
    reference_m: int

    def __post_init__(self):
        if self.reference_m < 8 * self.m or self.reference_m % self.m != 0:
            raise ValueError("reference grid must be a multiple of m, at least 8x finer")


@dataclass
class BenchRecord:
    case: str
    method: str
    median_seconds: float
    iterations: int | None
    sup_error: float
    m: int
    reference_m: int
    status: str = "ok"


@dataclass
class BenchReport:
    records: list[BenchRecord]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {BENCH_SCHEMA}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow(
                [
                    r.case,
                    r.method,
                    f"{r.median_seconds:.17g}",
                    "" if r.iterations is None else r.iterations,
                    f"{r.sup_error:.17g}",
                    r.m,
                    r.reference_m,
                    r.status,
                ]
            )
        return buf.getvalue()


def _build_suite(m: int, reference_m: int) -> list[BenchCase]:
    cases = []
    for delta in _DELTAS:
        for stem, family, param, g_family, beta in _CASE_DEFS:
            model = model_from(family, param, delta, g_family, beta)
            cases.append(
                BenchCase(name=f"{stem}_delta{delta:g}", model=model, m=m, reference_m=reference_m)
            )
    return cases


def paper_suite() -> list[BenchCase]:
    """The ten standard settings at m = 1000 with a 50000-point reference."""
    return _build_suite(m=1000, reference_m=50_000)


def desk_suite() -> list[BenchCase]:
    """Same settings at desk scale: m = 500 against an 8000-point reference."""
    return _build_suite(m=500, reference_m=8000)


def _sup_error(values: np.ndarray, reference: np.ndarray, m: int, reference_m: int) -> float:
    stride = reference_m // m
    return float(np.abs(values - reference[::stride]).max())


def run_benchmark(
    cases: list[BenchCase],
    repeats: int = 5,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> BenchReport:
    """Run both methods on every case: median wall time of `repeats` runs
    after one warm-up, plus sup error against the fine recursive reference.

    An iteration cap hit is recorded as a timeout row (with the partial
    iterate's error), never raised.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    records = []
    for case in cases:
        reference = solve_recursive(
            case.model, case.reference_m, "deterministic", compute_residual=False
        ).price.values

        # method 2: forward recursion
        times = []
        sol = None
        for _ in range(repeats + 1):  # first run is the warm-up
            t0 = time.perf_counter()
            sol = solve_recursive(case.model, case.m, "deterministic", compute_residual=False)
            times.append(time.perf_counter() - t0)
        records.append(
            BenchRecord(
                case=case.name,
                method="recursive",
                median_seconds=statistics.median(times[1:]),
                iterations=None,
                sup_error=_sup_error(sol.price.values, reference, case.m, case.reference_m),
                m=case.m,
                reference_m=case.reference_m,
            )
        )

        # method 1: successive operator application from the cost schedule
        times = []
        sol = None
        status = "ok"
        for _ in range(repeats + 1):
            t0 = time.perf_counter()
            try:
                sol = solve_iterative(case.model, case.m, "deterministic", tol=tol, max_iter=max_iter)
            except MaxIterationsExceeded as exc:
                sol = exc.solution
                status = "timeout"
            times.append(time.perf_counter() - t0)
        records.append(
            BenchRecord(
                case=case.name,
                method="iterate",
                median_seconds=statistics.median(times[1:]),
                iterations=sol.iterations,
                sup_error=_sup_error(sol.price.values, reference, case.m, case.reference_m),
                m=case.m,
                reference_m=case.reference_m,
                status=status,
            )
        )
    return BenchReport(records=records)
