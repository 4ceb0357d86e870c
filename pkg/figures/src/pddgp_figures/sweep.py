"""Sweep figure: mean rate with error bars per method, versus transmit power
budget (dBm) or reflecting-element count.

Consumes the aggregated sweep summary CSV so the plotted means and error
bars are the emitted columns, not recomputed statistics.

Usage: pddgp-plot-sweep --in run_sweep_summary.csv --x pmax --out fig.svg
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .csvio import SWEEP_SUMMARY_COLUMNS, SchemaError, read_rows

_X_LABEL = {"pmax": "transmit power budget (dBm)", "ni": "reflecting elements"}
_MARKERS = ("o", "s", "^", "d", "v")


def plot_sweep(csv_path: str | Path, x: str, out_path: str | Path, log_x: bool = False):
    """Render one sweep summary CSV; returns the figure (already saved)."""
    if x not in _X_LABEL:
        raise SchemaError(f"x must be one of {sorted(_X_LABEL)}, got '{x}'")
    rows = read_rows(csv_path, SWEEP_SUMMARY_COLUMNS)
    mismatched = sorted({r["sweep_var"] for r in rows} - {x})
    if mismatched:
        raise SchemaError(
            f"{csv_path}: sweep_var column holds {mismatched}, expected '{x}'")

    methods = list(dict.fromkeys(r["method"] for r in rows))  # CSV order
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for marker, method in zip(_MARKERS, methods):
        sub = [r for r in rows if r["method"] == method]
        xs = [float(r["sweep_value"]) for r in sub]
        means = [float(r["rate_bps_hz_mean"]) for r in sub]
        stds = [float(r["rate_bps_hz_std"]) for r in sub]
        ax.errorbar(xs, means, yerr=stds, marker=marker, capsize=3, label=method)
    if log_x:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(_X_LABEL[x])
    ax.set_ylabel("rate (bits/s/Hz)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="csv_in", required=True, help="sweep summary CSV")
    parser.add_argument("--x", dest="x", required=True, choices=("pmax", "ni"))
    parser.add_argument("--out", dest="out", required=True, help="output image (SVG by default)")
    parser.add_argument("--log-x", action="store_true", help="logarithmic x axis")
    args = parser.parse_args(argv)
    out = Path(args.out)
    if out.suffix == "":
        out = out.with_suffix(".svg")
    try:
        plot_sweep(args.csv_in, args.x, out, log_x=args.log_x)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
