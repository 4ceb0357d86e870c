"""Strict readers for the two documented CSV schemas."""

from __future__ import annotations

import csv
from pathlib import Path

CONVERGENCE_COLUMNS = ("iter", "outer_stage", "rho", "R_nats", "Rhat_nats",
                       "max_abs_g", "mu", "alpha", "wall_ms")
SWEEP_SUMMARY_COLUMNS = ("method", "sweep_var", "sweep_value", "realizations",
                         "failures", "rate_nats_mean", "rate_nats_std",
                         "rate_bps_hz_mean", "rate_bps_hz_std", "wall_ms_mean",
                         "iters_inner_mean")


class SchemaError(ValueError):
    """CSV does not match the documented schema; message names the columns."""


def read_rows(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"input file not found: {p}")
    with open(p, newline="") as fh:
        reader = csv.DictReader(fh)
        have = tuple(reader.fieldnames or ())
        missing = [c for c in required if c not in have]
        if missing:
            raise SchemaError(
                f"{p}: missing column(s) {missing}; found {list(have)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{p}: no data rows")
    return rows
