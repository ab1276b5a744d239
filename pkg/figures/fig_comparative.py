#!/usr/bin/env python3
"""Price schedules under transaction-cost variants (compare command output)."""

import matplotlib.pyplot as plt

from common import make_parser, read_csv, run, save_svg


def render():
    args = make_parser(__doc__).parse_args()
    header, rows = read_csv(args.input, "chainsolve/compare/1")
    if header[0] != "s" or len(header) < 3:
        raise ValueError(f"unexpected columns {header}")
    s = [float(r[0]) for r in rows]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for col, label in enumerate(header[1:], start=1):
        style = {"linewidth": 2.0} if label == "baseline" else {"linewidth": 1.3}
        ax.plot(s, [float(r[col]) for r in rows], label=label, **style)
    ax.set_xlabel("production stage s")
    ax.set_ylabel("equilibrium price p(s)")
    ax.set_title("Comparative statics of the price schedule")
    ax.legend()
    ax.grid(True, alpha=0.3)
    save_svg(fig, args.output)


if __name__ == "__main__":
    run(render)
