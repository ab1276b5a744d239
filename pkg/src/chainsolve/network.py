"""Firm-allocation trees simulated from a stochastic equilibrium solution.

Starting from the most downstream firm at stage 1, each firm re-optimizes
its subcontracted amount and search effort at its exact stage (off-grid
stages arise as t*/k), draws a realized partner count from the shifted
Poisson distribution, and spawns one upstream firm per partner at stage
t*/k.  The process ends when a firm keeps all remaining production
in-house.  Sibling subtrees draw from independent streams derived from
(seed, path-from-root), so identical seeds give identical trees.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ChainsolveError, DomainError, ModelSpec
from .solver import Solution

RNG_NAME = "philox"
NETWORK_SCHEMA = "chainsolve/network/1"
DEFAULT_MAX_DEPTH = 10_000

# stages this close to a grid knot (in grid units) count as on-grid
_GRID_SNAP = 1e-9


class DepthExceeded(ChainsolveError):
    """Recursion passed max_depth; signals a degenerate policy."""


@dataclass
class FirmNode:
    """One firm: its stage, production split, and realized partners."""

    stage: float
    in_house: float
    t_subcontracted: float
    lam: float
    realized_k: int
    value_added: float
    price: float
    children: list["FirmNode"] = field(default_factory=list)


@dataclass
class ProductionNetwork:
    """Rooted tree of firms for one seed, with summary statistics."""

    root: FirmNode
    seed: int
    model: ModelSpec
    m: int
    stats: dict


def _rng_for_path(seed: int, path: tuple[int, ...]) -> np.random.Generator:
    """Counter-based stream derived deterministically from (seed, path)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=path))
    )


def sample_partner_count(lam: float, rng: np.random.Generator) -> int:
    """Draw a partner count: 1 + Poisson(lam), by pmf inversion.

    lam = 0 returns 1 without consuming randomness.  Efforts large enough
    to underflow exp(-lam) never arise in equilibrium (the partnership cost
    dominates); they fall back to the generator's native Poisson.
    """
    if lam < 0.0:
        raise DomainError(f"search effort must be >= 0: {lam}")
    if lam == 0.0:
        return 1
    if lam > 700.0:
        return 1 + int(rng.poisson(lam))
    u = rng.random()
    k = 1
    term = math.exp(-lam)
    cum = term
    cap = int(math.ceil(lam + 12.0 * math.sqrt(lam + 1.0) + 30.0))
    while u > cum and k < cap:
        term *= lam / k
        k += 1
        cum += term
    return k


def _optimize_at(model, upstream, m, tgrid, stage):
    """Re-derive (value, t*, lam*) at an exact stage from the solved table.

    Grid construction keeps at least one step in-house: on-grid stages
    choose t <= stage - h, off-grid stages choose t at grid knots strictly
    below.  This pins the accounting identity at every node.
    """
    pos = stage * m
    near = round(pos)
    if abs(pos - near) <= _GRID_SNAP:
        jmax = int(near) - 1
    else:
        jmax = int(math.floor(pos))
    jmax = max(jmax, 0)
    in_house = np.clip(stage - tgrid[: jmax + 1], 0.0, 1.0)
    seg = np.asarray(model.cost_values(in_house), dtype=float) + upstream.values[: jmax + 1]
    lam_tab = upstream.lam
    mn = seg.min()
    cands = np.nonzero(seg == mn)[0]
    if len(cands) == 1:
        jstar = int(cands[0])
    else:
        jstar = int(min(cands, key=lambda j: (lam_tab[j], j)))
    return float(seg[jstar]), float(tgrid[jstar]), float(lam_tab[jstar]), jstar


def simulate_network(
    model: ModelSpec,
    solution: Solution,
    seed: int,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ProductionNetwork:
    """Simulate one equilibrium firm allocation from a stochastic solution."""
    if solution.policy.mode != "stochastic":
        raise ValueError("network simulation requires a stochastic solution")
    if solution.upstream.lam is None:
        raise ValueError("solution lacks the effort table needed for simulation")
    m = solution.price.m
    tgrid = np.linspace(0.0, 1.0, m + 1)
    upstream = solution.upstream

    holder: list[FirmNode] = []
    # explicit stack: firm trees can outgrow the interpreter recursion limit
    stack: list[tuple[float, tuple[int, ...], int, list[FirmNode]]] = [(1.0, (), 0, holder)]
    while stack:
        stage, path, depth, sink = stack.pop()
        if depth > max_depth:
            raise DepthExceeded(f"firm tree deeper than {max_depth} at stage {stage:g}")
        value, t_star, lam_star, jstar = _optimize_at(model, upstream, m, tgrid, stage)
        if jstar == 0:
            # all remaining production in-house
            sink.append(
                FirmNode(
                    stage=stage,
                    in_house=stage,
                    t_subcontracted=0.0,
                    lam=lam_star,
                    realized_k=1,
                    value_added=float(model.cost_values(stage)),
                    price=value,
                )
            )
            continue
        k = sample_partner_count(lam_star, _rng_for_path(seed, path))
        node = FirmNode(
            stage=stage,
            in_house=stage - t_star,
            t_subcontracted=t_star,
            lam=lam_star,
            realized_k=k,
            value_added=float(model.cost_values(stage - t_star) + model.g_values(k)),
            price=value,
        )
        sink.append(node)
        child_stage = t_star / k
        for idx in reversed(range(k)):  # LIFO pop keeps child order 0..k-1
            stack.append((child_stage, path + (idx,), depth + 1, node.children))

    net = ProductionNetwork(root=holder[0], seed=seed, model=model, m=m, stats={})
    net.stats = network_stats(net)
    return net


def network_stats(net: ProductionNetwork) -> dict:
    """Depth, firm count, per-layer widths and the value-added distribution."""
    layer_counts: list[int] = []
    value_added: list[float] = []
    frontier = [net.root]
    while frontier:
        layer_counts.append(len(frontier))
        value_added.extend(node.value_added for node in frontier)
        frontier = [child for node in frontier for child in node.children]
    return {
        "depth": len(layer_counts) - 1,
        "n_firms": sum(layer_counts),
        "per_layer_counts": layer_counts,
        "value_added_distribution": value_added,
    }


# ---------------------------------------------------------------------------
# serialization (formats documented in the CLI module)


def _node_fields(node: FirmNode) -> dict:
    return {
        "stage": node.stage,
        "in_house": node.in_house,
        "t_subcontracted": node.t_subcontracted,
        "lambda": node.lam,
        "realized_k": node.realized_k,
        "value_added": node.value_added,
        "price": node.price,
        "children": [],
    }


def _node_dict(node: FirmNode) -> dict:
    out = _node_fields(node)
    stack = [(node, out)]
    while stack:
        src, dst = stack.pop()
        for child in src.children:
            entry = _node_fields(child)
            dst["children"].append(entry)
            stack.append((child, entry))
    return out


def network_to_dict(net: ProductionNetwork) -> dict:
    return {
        "schema": NETWORK_SCHEMA,
        "seed": net.seed,
        "rng": RNG_NAME,
        "m": net.m,
        "model": net.model.describe(),
        "stats": net.stats,
        "root": _node_dict(net.root),
    }


def network_to_json(net: ProductionNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2)


def network_to_dot(net: ProductionNetwork) -> str:
    """DOT digraph; value_added rides as a node attribute and a comment."""
    lines = [
        "digraph production_network {",
        f'  // schema: {NETWORK_SCHEMA}; seed={net.seed}; rng={RNG_NAME}',
        "  node [shape=circle];",
    ]

    stack = [(net.root, "n")]
    while stack:
        node, name = stack.pop()
        lines.append(
            f'  "{name}" [size="{node.value_added:.17g}", stage="{node.stage:.17g}"];'
            f"  // value_added={node.value_added:.17g}"
        )
        for idx in range(len(node.children)):
            lines.append(f'  "{name}" -> "{name}.{idx}";')
        for idx, child in reversed(list(enumerate(node.children))):
            stack.append((child, f"{name}.{idx}"))
    lines.append("}")
    return "\n".join(lines) + "\n"
