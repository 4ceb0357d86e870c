"""Convergence figure: rate and penalized objective per inner iteration,
with the penalty-stage boundaries annotated by their rho values.

Usage: pddgp-plot-convergence --in trace.csv --out trace.svg
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .csvio import CONVERGENCE_COLUMNS, SchemaError, read_rows


def plot_convergence(csv_path: str | Path, out_path: str | Path):
    """Render one trace CSV; returns the figure (already saved)."""
    rows = read_rows(csv_path, CONVERGENCE_COLUMNS)
    iters = [int(r["iter"]) for r in rows]
    r_nats = [float(r["R_nats"]) for r in rows]
    rhat_nats = [float(r["Rhat_nats"]) for r in rows]
    stages = [int(r["outer_stage"]) for r in rows]
    rhos = [float(r["rho"]) for r in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(iters, r_nats, "-", color="black", label="rate")
    ax.plot(iters, rhat_nats, "--", color="tab:red", label="penalized objective")
    for i in range(1, len(rows)):
        if stages[i] != stages[i - 1]:
            ax.axvline(iters[i] - 0.5, color="0.8", linewidth=0.8)
            ax.annotate(f"rho={rhos[i]:.0e}", (iters[i], min(rhat_nats)),
                        rotation=90, fontsize=7, color="0.4",
                        va="bottom", ha="left")
    ax.set_xlabel("iteration")
    ax.set_ylabel("rate (nats)")
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="csv_in", required=True, help="convergence trace CSV")
    parser.add_argument("--out", dest="out", required=True, help="output image (SVG by default)")
    args = parser.parse_args(argv)
    out = Path(args.out)
    if out.suffix == "":
        out = out.with_suffix(".svg")
    try:
        plot_convergence(args.csv_in, out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
