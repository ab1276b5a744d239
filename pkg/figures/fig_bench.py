#!/usr/bin/env python3
"""Method timing comparison as grouped bars (bench command output)."""

import matplotlib.pyplot as plt
import numpy as np

from common import make_parser, read_csv, run, save_svg


def render():
    args = make_parser(__doc__).parse_args()
    header, rows = read_csv(args.input, "chainsolve/bench/1")
    idx = {name: header.index(name) for name in ("case", "method", "median_seconds", "status")}
    cases = list(dict.fromkeys(r[idx["case"]] for r in rows))  # first-seen order
    times = {(r[idx["case"]], r[idx["method"]]): float(r[idx["median_seconds"]]) for r in rows}
    status = {(r[idx["case"]], r[idx["method"]]): r[idx["status"]] for r in rows}

    x = np.arange(len(cases))
    width = 0.38
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for offset, (method, color) in zip(
        (-width / 2, width / 2),
        (("iterate", "tab:orange"), ("recursive", "tab:blue")),
    ):
        heights = [times.get((case, method), np.nan) for case in cases]
        bars = ax.bar(x + offset, heights, width, label=f"method: {method}", color=color)
        for bar, case in zip(bars, cases):
            if status.get((case, method)) == "timeout":
                ax.annotate("timeout", (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                            ha="center", va="bottom", fontsize=7, rotation=90)
    ax.set_yscale("log")
    ax.set_xticks(x, cases, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("median wall time (s)")
    ax.set_title("Computation time by model and method")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    save_svg(fig, args.output)


if __name__ == "__main__":
    run(render)
