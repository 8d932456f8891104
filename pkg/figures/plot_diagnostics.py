#!/usr/bin/env python3
"""Plot the per-level functionals L, Q, F and TV from a diagnostics NDJSON.

Usage: plot_diagnostics.py diagnostics.ndjson --out diag.png [--budget B]
The optional budget draws the line F(0) + B that a sourced run must stay
under.  Exits 1 on schema mismatch without writing anything.
"""

import argparse
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KEYS = {"k", "t", "L", "Q", "F", "TV"}


def load_records(path):
    records = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if set(obj) != KEYS:
                raise ValueError(f"{path}: bad record keys {sorted(obj)}")
            records.append(obj)
    if not records:
        raise ValueError(f"{path}: no records")
    return records


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("diagnostics")
    parser.add_argument("--out", required=True)
    parser.add_argument("--budget", type=float, default=None)
    args = parser.parse_args(argv)

    try:
        records = load_records(args.diagnostics)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    ts = [rec["t"] for rec in records]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for key, style in (("L", "-"), ("Q", "--"), ("F", "-"), ("TV", ":")):
        ax.plot(ts, [rec[key] for rec in records], style, lw=1.4, label=key)
    if args.budget is not None:
        ax.axhline(records[0]["F"] + args.budget, color="k", lw=0.9,
                   dashes=(4, 2), label="F(0) + budget")
    ax.set_xlabel("t")
    ax.set_ylabel("functional value")
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120, metadata={"Software": None})
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
