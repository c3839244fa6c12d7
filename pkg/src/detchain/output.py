"""CSV and JSON serialization of sweep results.

Floating-point values are written with 17 significant digits so every
output round-trips bit-exactly; the JSON emitter is hand-rolled to keep
that guarantee (the stdlib encoder formats floats its own way).
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import SweepConfig
from .harness import DetWindow, PeakFit, SweepResult, SweepRow
from .theory import ThresholdSet

CSV_HEADER = "w,method,i_typ,lnI_std,n_ok,n_divergent"
REALIZATIONS_HEADER = "w,method,realization,current,ln_i"


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def sweep_csv_text(result: SweepResult) -> str:
    lines = [CSV_HEADER]
    for row in result.rows:
        lines.append(
            f"{format_float(row.w)},{row.method},{format_float(row.i_typ)},"
            f"{format_float(row.ln_i_std)},{row.n_ok},{row.n_divergent}"
        )
    return "\n".join(lines) + "\n"


def realizations_csv_text(result: SweepResult) -> str:
    """Per-realization current dump (ln_i = -inf marks a divergent
    realization, nan a failed one)."""
    lines = [REALIZATIONS_HEADER]
    for wi, w in enumerate(result.config.w_grid):
        for method in result.config.methods:
            for r, current in enumerate(result.currents[(wi, method)]):
                ln_i = math.log(current) if current > 0.0 else (
                    -math.inf if current == 0.0 else math.nan
                )
                lines.append(
                    f"{format_float(w)},{method},{r},"
                    f"{format_float(float(current))},{format_float(ln_i)}"
                )
    return "\n".join(lines) + "\n"


def _json_fragment(value, indent: int) -> str:
    pad = "  " * indent
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return format_float(x) if math.isfinite(x) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_json_fragment(v, indent + 1)}"
            for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        inner = ",\n".join(
            f"{pad}  {_json_fragment(v, indent + 1)}" for v in value
        )
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def json_text(value) -> str:
    return _json_fragment(value, 0) + "\n"


def _chain_echo(config: SweepConfig) -> dict:
    chain = config.chain
    return {
        "n_sites": chain.n_sites,
        "alpha": "inf" if math.isinf(chain.alpha) else chain.alpha,
        "gamma": chain.gamma,
        "omega_nn": chain.omega_nn,
        "gamma_pump": chain.gamma_pump,
        "gamma_drain": chain.gamma_drain,
        "boundary": chain.boundary,
        "hbar": chain.hbar,
    }


def summary_dict(
    result: SweepResult,
    thresholds: Optional[ThresholdSet] = None,
    window: Optional[DetWindow] = None,
    fit: Optional[PeakFit] = None,
) -> dict:
    config = result.config
    invalid = [
        {"w": row.w, "method": row.method, "n_failed": row.n_failed}
        for row in result.rows
        if not row.valid
    ]
    return {
        "config": {
            **_chain_echo(config),
            "w_grid": list(config.w_grid),
            "n_realizations": config.n_realizations,
            "master_seed": config.master_seed,
            "methods": list(config.methods),
            "output_csv": config.output_csv,
        },
        "provenance": dict(result.provenance),
        "thresholds": thresholds.as_dict() if thresholds is not None else None,
        "det_window": {
            "w_min_loc": window.w_min_loc,
            "w_max_loc": window.w_max_loc,
            "index_min": window.index_min,
            "index_max": window.index_max,
            "ratio": window.ratio,
        }
        if window is not None
        else None,
        "peak_fit": {
            "w_fit": fit.w_fit,
            "errorbar": fit.errorbar,
            "fit_window": list(fit.fit_window),
            "curvature": fit.curvature,
        }
        if fit is not None
        else None,
        "invalid_rows": invalid,
    }


def table_csv_text(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Generic delimited table with 17-digit floats."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row[col]
            if isinstance(value, (float, np.floating)):
                cells.append(format_float(float(value)))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    """Load aggregated rows back from a sweep CSV."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a sweep CSV (expected header {CSV_HEADER!r})")
    rows = []
    for line in lines[1:]:
        w, method, i_typ, ln_std, n_ok, n_div = line.split(",")
        rows.append(
            SweepRow(
                w=float(w),
                method=method,
                i_typ=float(i_typ),
                ln_i_std=float(ln_std),
                n_ok=int(n_ok),
                n_divergent=int(n_div),
            )
        )
    return rows
