#!/usr/bin/env python3
"""Equilibrium price schedule from a price CSV (solve command output)."""

import matplotlib.pyplot as plt

from common import make_parser, read_csv, run, save_svg


def render():
    args = make_parser(__doc__).parse_args()
    header, rows = read_csv(args.input, "chainsolve/price/1")
    if header != ["s", "p"]:
        raise ValueError(f"unexpected columns {header}")
    s = [float(r[0]) for r in rows]
    p = [float(r[1]) for r in rows]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(s, p, color="tab:blue", linewidth=1.6)
    ax.set_xlabel("production stage s")
    ax.set_ylabel("equilibrium price p(s)")
    ax.set_title("Equilibrium price schedule")
    ax.grid(True, alpha=0.3)
    save_svg(fig, args.output)


if __name__ == "__main__":
    run(render)
