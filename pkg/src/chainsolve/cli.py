"""Command-line front end: declarative JSON configs in, CSV/JSON/DOT out.

Subcommands::

    solve    --config F [--method iterate|recursive] [--variant det|stoch]
             [--m N] [--tol T] [--max-iter N] [--allow-partial] --out DIR
    compare  --config F --vary delta=1.05,1.1 [--vary beta=...] [--m N] --out DIR
    network  --config F [--seeds 1,2,3] [--m N] --out DIR
    bench    --suite paper|desk [--repeats R] [--tol T] [--max-iter N] --out FILE

Exit codes: 0 success, 1 config/validation error, 2 solver failure,
3 I/O failure.  CHAINSOLVE_THREADS caps the linear-algebra thread pools
(default 1 for bench, so timings stay single-core honest).

Output schemas (every file embeds its schema string):
  price CSV    ``# schema: chainsolve/price/1``   columns s,p
  policy CSV   ``# schema: chainsolve/policy/1``  columns s,t_star,{k_star|lambda_star}
  compare CSV  ``# schema: chainsolve/compare/1`` columns s,baseline,<param>=<value>,...
  bench CSV    ``# schema: chainsolve/bench/1``   columns per the bench module
  network JSON ``"schema": "chainsolve/network/1"`` nested firm tree
  network DOT  digraph with node attribute size = value_added

Floats are written with 17 significant digits, so files round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

CONFIG_VERSION = 1
PRICE_SCHEMA = "chainsolve/price/1"
POLICY_SCHEMA = "chainsolve/policy/1"
COMPARE_SCHEMA = "chainsolve/compare/1"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

_VARIANTS = {
    "det": "deterministic",
    "deterministic": "deterministic",
    "stoch": "stochastic",
    "stochastic": "stochastic",
}


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems as config errors (exit 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed and validated run configuration."""

    model_block: dict
    m: int
    method: str
    variant: str
    tol: float
    max_iter: int
    seeds: list[int]
    max_depth: int

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if raw.get("version") != CONFIG_VERSION:
            raise ConfigError(f"config version must be {CONFIG_VERSION}")
        if "model" not in raw:
            raise ConfigError("config lacks a model block")
        grid = raw.get("grid", {})
        solver = raw.get("solver", {})
        network = raw.get("network", {})
        variant = _VARIANTS.get(str(solver.get("variant", "deterministic")))
        if variant is None:
            raise ConfigError(f"unknown variant {solver.get('variant')!r}")
        method = str(solver.get("method", "recursive"))
        if method not in ("iterate", "recursive"):
            raise ConfigError(f"unknown method {method!r}")
        return cls(
            model_block=raw["model"],
            m=int(grid.get("m", 1000)),
            method=method,
            variant=variant,
            tol=float(solver.get("tol", 1e-8)),
            max_iter=int(solver.get("max_iter", 100_000)),
            seeds=[int(s) for s in network.get("seeds", [1])],
            max_depth=int(network.get("max_depth", 10_000)),
        )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _build_model(cfg: RunConfig):
    from . import model as model_mod

    return model_mod.make_model(cfg.model_block)


def _solve(model, cfg: RunConfig, allow_partial: bool):
    from . import solver as solver_mod

    if cfg.method == "recursive":
        return solver_mod.solve_recursive(model, cfg.m, cfg.variant)
    try:
        return solver_mod.solve_iterative(
            model, cfg.m, cfg.variant, tol=cfg.tol, max_iter=cfg.max_iter
        )
    except solver_mod.MaxIterationsExceeded as exc:
        if allow_partial:
            print(
                f"warning: iteration cap hit (residual {exc.solution.residual:.3g}); "
                "writing partial result",
                file=sys.stderr,
            )
            return exc.solution
        raise


def _write_price_csv(path: Path, solution) -> None:
    grid = solution.price.grid()
    lines = [f"# schema: {PRICE_SCHEMA}", "s,p"]
    lines += [f"{_fmt(s)},{_fmt(p)}" for s, p in zip(grid, solution.price.values)]
    path.write_text("\n".join(lines) + "\n")


def _write_policy_csv(path: Path, solution) -> None:
    grid = solution.price.grid()
    pol = solution.policy
    if pol.mode == "deterministic":
        header = "s,t_star,k_star"
        rows = [
            f"{_fmt(s)},{_fmt(t)},{int(k)}"
            for s, t, k in zip(grid, pol.t_star, pol.k_star)
        ]
    else:
        header = "s,t_star,lambda_star"
        rows = [
            f"{_fmt(s)},{_fmt(t)},{_fmt(lam)}"
            for s, t, lam in zip(grid, pol.t_star, pol.lambda_star)
        ]
    path.write_text("\n".join([f"# schema: {POLICY_SCHEMA}", header] + rows) + "\n")


def cmd_solve(args) -> int:
    cfg = RunConfig.from_file(args.config)
    if args.m:
        cfg.m = args.m
    if args.method:
        cfg.method = args.method
    if args.variant:
        cfg.variant = _VARIANTS[args.variant]
    if args.tol:
        cfg.tol = args.tol
    if args.max_iter:
        cfg.max_iter = args.max_iter
    model = _build_model(cfg)
    solution = _solve(model, cfg, args.allow_partial)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_price_csv(out / "price.csv", solution)
    _write_policy_csv(out / "policy.csv", solution)
    iters = "-" if solution.iterations is None else solution.iterations
    print(
        f"solved method={solution.method} variant={solution.variant} m={cfg.m} "
        f"iterations={iters} residual={solution.residual:.3g} "
        f"seconds={solution.wall_time:.3f}"
    )
    print(f"wrote {out / 'price.csv'} and {out / 'policy.csv'}")
    return EXIT_OK


def _parse_vary(specs: list[str]) -> list[tuple[str, list[float]]]:
    out = []
    for spec in specs:
        name, _, rest = spec.partition("=")
        name = name.strip()
        if name not in ("delta", "beta") or not rest:
            raise ConfigError(f"--vary expects delta=... or beta=..., got {spec!r}")
        try:
            values = [float(v) for v in rest.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --vary values in {spec!r}") from exc
        if not values:
            raise ConfigError(f"--vary {name} needs at least one value")
        out.append((name, values))
    return out


def _override_model_block(block: dict, name: str, value: float) -> dict:
    out = json.loads(json.dumps(block))  # deep copy
    if name == "delta":
        out["delta"] = value
    else:
        out["g"] = dict(out["g"])
        out["g"]["beta"] = value
    return out


def cmd_compare(args) -> int:
    import numpy as np

    from . import model as model_mod

    cfg = RunConfig.from_file(args.config)
    if args.m:
        cfg.m = args.m
    if args.method:
        cfg.method = args.method
    varies = _parse_vary(args.vary or [])
    if not varies:
        raise ConfigError("compare needs at least one --vary")

    columns: list[tuple[str, float | None, str]] = [("baseline", None, "")]
    for name, values in varies:
        for v in values:
            columns.append((f"{name}={v:g}", v, name))

    solutions = {}
    for label, value, name in columns:
        block = cfg.model_block if value is None else _override_model_block(cfg.model_block, name, value)
        model = model_mod.make_model(block)
        sol = _solve_block(model, cfg)
        solutions[label] = sol.price.values

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = np.linspace(0.0, 1.0, cfg.m + 1)
    header = "s," + ",".join(label for label, _, _ in columns)
    lines = [f"# schema: {COMPARE_SCHEMA}", header]
    for i, s in enumerate(grid):
        lines.append(
            ",".join([_fmt(s)] + [_fmt(solutions[label][i]) for label, _, _ in columns])
        )
    (out / "compare.csv").write_text("\n".join(lines) + "\n")

    # pointwise ordering report per varied parameter (ascending values)
    base_value = {
        "delta": float(cfg.model_block["delta"]),
        "beta": float(cfg.model_block["g"]["beta"]),
    }
    for name, values in varies:
        ordered = sorted({base_value[name]: "baseline"} | {v: f"{name}={v:g}" for v in values})
        labels = ({base_value[name]: "baseline"} | {v: f"{name}={v:g}" for v in values})
        for lo, hi in zip(ordered, ordered[1:]):
            a, b = solutions[labels[lo]], solutions[labels[hi]]
            ok = bool(np.all(a <= b + 1e-9))
            print(f"ordering {name}: {lo:g} <= {hi:g}: {'OK' if ok else 'VIOLATION'}")
    print(f"wrote {out / 'compare.csv'}")
    return EXIT_OK


def _solve_block(model, cfg: RunConfig):
    from . import solver as solver_mod

    if cfg.method == "recursive":
        return solver_mod.solve_recursive(model, cfg.m, cfg.variant, compute_residual=False)
    return solver_mod.solve_iterative(model, cfg.m, cfg.variant, tol=cfg.tol, max_iter=cfg.max_iter)


def cmd_network(args) -> int:
    from . import network as network_mod

    cfg = RunConfig.from_file(args.config)
    if args.m:
        cfg.m = args.m
    if cfg.variant != "stochastic":
        raise ConfigError("network simulation requires variant=stochastic in the config")
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else cfg.seeds
    model = _build_model(cfg)
    solution = _solve(model, cfg, allow_partial=False)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        net = network_mod.simulate_network(model, solution, seed, max_depth=cfg.max_depth)
        (out / f"network_seed{seed}.json").write_text(network_mod.network_to_json(net) + "\n")
        (out / f"network_seed{seed}.dot").write_text(network_mod.network_to_dot(net))
        print(
            f"seed {seed}: depth={net.stats['depth']} firms={net.stats['n_firms']} "
            f"wrote network_seed{seed}.json/.dot"
        )
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench as bench_mod

    suite = bench_mod.paper_suite() if args.suite == "paper" else bench_mod.desk_suite()
    report = bench_mod.run_benchmark(
        suite, repeats=args.repeats, tol=args.tol or 1e-8, max_iter=args.max_iter or 100_000
    )
    text = report.to_csv()
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    for record in report.records:
        print(
            f"{record.case} {record.method}: {record.median_seconds:.4f}s "
            f"sup_error={record.sup_error:.3g} {record.status}"
        )
    print(f"wrote {out}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="chainsolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one config, write price and policy CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("iterate", "recursive"))
    p.add_argument("--variant", choices=tuple(_VARIANTS))
    p.add_argument("--m", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="comparative statics across delta/beta variants")
    p.add_argument("--config", required=True)
    p.add_argument("--vary", action="append", metavar="PARAM=V1,V2,...")
    p.add_argument("--m", type=int)
    p.add_argument("--method", choices=("iterate", "recursive"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("network", help="simulate firm-allocation trees, write JSON and DOT")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", help="comma-separated seeds (default: config)")
    p.add_argument("--m", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("bench", help="run the method comparison suite, write CSV")
    p.add_argument("--suite", choices=("paper", "desk"), required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def _cap_threads(command: str) -> None:
    cap = os.environ.get("CHAINSOLVE_THREADS")
    if cap is None and command == "bench":
        cap = "1"  # architecture-honest single-core timing by default
    if cap is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    _cap_threads(args.command)
    from . import model as model_mod
    from . import solver as solver_mod

    try:
        return args.func(args)
    except (ConfigError, ValueError, model_mod.UnknownFamilyError,
            model_mod.ParameterOutOfRangeError, model_mod.AssumptionViolatedError,
            model_mod.DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver_mod.MaxIterationsExceeded as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except model_mod.ChainsolveError as exc:  # e.g. DepthExceeded
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
