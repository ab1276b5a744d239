#!/usr/bin/env python3
"""Radial firm-allocation tree from a network JSON (network command output).

The most downstream firm sits at the center; each layer of upstream
partners forms the next ring out.  Node area is proportional to the firm's
value added.
"""

import math

import matplotlib.pyplot as plt
import numpy as np

from common import make_parser, read_network_json, run, save_svg

MAX_NODE_AREA = 500.0   # points^2 for the largest firm
MIN_NODE_AREA = 3.0


def layout(root: dict):
    """Radial positions: leaves evenly spaced by angle, radius = depth.

    Leaves are numbered in depth-first order, so every subtree owns a
    contiguous angular wedge; an internal node sits at the middle of its
    children's span.
    """
    n_leaves = 0
    stack = [root]
    while stack:
        node = stack.pop()
        if not node["children"]:
            n_leaves += 1
        stack.extend(node["children"])
    step = 2.0 * math.pi / max(n_leaves, 1)

    angles: dict[int, float] = {}
    order: list[tuple[dict, int]] = []  # (node, depth), postorder
    next_leaf = 0
    # iterative postorder: angle of a parent needs its children's angles
    visit = [(root, 0, False)]
    while visit:
        node, depth, expanded = visit.pop()
        if expanded or not node["children"]:
            if node["children"]:
                child_angles = [angles[id(c)] for c in node["children"]]
                angles[id(node)] = (min(child_angles) + max(child_angles)) / 2.0
            else:
                angles[id(node)] = next_leaf * step
                next_leaf += 1
            order.append((node, depth))
        else:
            visit.append((node, depth, True))
            for child in reversed(node["children"]):
                visit.append((child, depth + 1, False))
    return order, angles


def render():
    args = make_parser(__doc__).parse_args()
    doc = read_network_json(args.input)
    root = doc["root"]
    order, angles = layout(root)

    xs, ys, areas, depths = [], [], [], []
    segments = []
    pos = {}
    for node, depth in order:
        theta = angles[id(node)]
        x, y = depth * math.cos(theta), depth * math.sin(theta)
        pos[id(node)] = (x, y)
        xs.append(x)
        ys.append(y)
        areas.append(node["value_added"])
        depths.append(depth)
        for child in node["children"]:
            segments.append((pos[id(node)], pos[id(child)]))

    va = np.asarray(areas)
    top = va.max() if va.max() > 0 else 1.0
    sizes = MIN_NODE_AREA + (MAX_NODE_AREA - MIN_NODE_AREA) * va / top

    fig, ax = plt.subplots(figsize=(7, 7))
    for (x0, y0), (x1, y1) in segments:
        ax.plot([x0, x1], [y0, y1], color="0.75", linewidth=0.5, zorder=1)
    ax.scatter(xs, ys, s=sizes, c=depths, cmap="viridis", zorder=2,
               edgecolors="none", alpha=0.9)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title(
        f"Firm allocation (seed {doc['seed']}: "
        f"{doc['stats']['n_firms']} firms, {doc['stats']['depth']} layers)"
    )
    save_svg(fig, args.output)


if __name__ == "__main__":
    run(render)
