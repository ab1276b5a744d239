"""Shared plumbing for the figure scripts: schema-checked readers and
deterministic SVG output (no timestamps, fixed hash salt)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "chainsolve-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaMismatch(Exception):
    pass


def make_parser(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="input", required=True, help="input file from the chainsolve CLI")
    parser.add_argument("--out", dest="output", required=True, help="output SVG path")
    return parser


def read_csv(path: str | Path, expected_schema: str) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a chainsolve CSV; verifies the embedded schema."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema: "):
        raise SchemaMismatch(f"{path}: missing schema line")
    schema = lines[0][len("# schema: "):].strip()
    if schema != expected_schema:
        raise SchemaMismatch(f"{path}: schema {schema!r}, expected {expected_schema!r}")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return header, rows


def read_network_json(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != "chainsolve/network/1":
        raise SchemaMismatch(f"{path}: schema {doc.get('schema')!r}, expected chainsolve/network/1")
    return doc


def save_svg(fig, path: str | Path) -> None:
    """Vector output, byte-stable across reruns of identical inputs."""
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run(render) -> None:
    """Script entry wrapper: schema problems exit nonzero with a message."""
    try:
        render()
    except (SchemaMismatch, FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
