#!/usr/bin/env python3
"""Log-log convergence plot with a least-squares slope annotation.

Usage: plot_convergence.py study.csv --out conv.png
Reads the two leading columns (parameter, value); a trailing
"# slope = ..." comment written by the study harness is echoed for
comparison.  Prints "slope=<fit>" so callers can check the annotation.
Exits 1 when fewer than two usable rows exist.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_study(path):
    rows = []
    header = None
    recorded = None
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "slope" in line and "=" in line:
                    recorded = float(line.split("=", 1)[1])
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None or len(rows) < 2:
        raise ValueError(f"{path}: need a header and at least two data rows")
    data = np.array(rows)
    return header, data, recorded


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("study")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    try:
        header, data, recorded = load_study(args.study)
        params, values = data[:, 0], data[:, 1]
        if np.any(params <= 0.0) or np.any(values <= 0.0):
            raise ValueError("log-log plot needs positive columns")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    slope, intercept = np.polyfit(np.log(params), np.log(values), 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(params, values, "o", ms=5)
    fit = np.exp(intercept) * params ** slope
    ax.loglog(params, fit, "-", lw=1.1)
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    ax.grid(alpha=0.3, which="both")
    ax.annotate(f"slope = {slope:.6f}", xy=(0.05, 0.08),
                xycoords="axes fraction")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120, metadata={"Software": None})
    plt.close(fig)
    print(f"slope={slope:.17g}")
    if recorded is not None:
        print(f"recorded_slope={recorded:.17g}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
