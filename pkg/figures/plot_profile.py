#!/usr/bin/env python3
"""Step-plot the cell profiles of a snapshot CSV (one panel per component).

Usage: plot_profile.py snapshot.csv --out profile.png [--components 1,3]
Exits 1 on schema mismatch without writing anything.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_snapshot(path):
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if header[:2] != ["t", "x"] or len(header) < 3 or not all(
            name == f"u{i + 1}" for i, name in enumerate(header[2:])):
        raise ValueError(f"{path}: header {header} is not a snapshot schema")
    if len(rows) < 2:
        raise ValueError(f"{path}: snapshot has no cells")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return float(data[0, 0]), data[:, 1], data[:, 2:]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("snapshot")
    parser.add_argument("--out", required=True)
    parser.add_argument("--components", default=None,
                        help="1-based component list, e.g. 1,3")
    args = parser.parse_args(argv)

    try:
        t, x, states = load_snapshot(args.snapshot)
        p = states.shape[1]
        if args.components:
            selection = [int(c) - 1 for c in args.components.split(",")]
            if any(c < 0 or c >= p for c in selection):
                raise ValueError(f"component selection outside 1..{p}")
        else:
            selection = list(range(p))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    fig, axes = plt.subplots(len(selection), 1, sharex=True,
                             figsize=(7.0, 2.2 * len(selection)),
                             squeeze=False)
    for ax, comp in zip(axes[:, 0], selection):
        ax.step(x, states[:, comp], where="mid", lw=1.2)
        ax.set_ylabel(f"u{comp + 1}")
        ax.grid(alpha=0.3)
    axes[-1, 0].set_xlabel("x")
    fig.suptitle(f"solution profile at t = {t:.6g}")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120, metadata={"Software": None})
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
