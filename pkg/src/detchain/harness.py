"""Disorder sweeps, DET-window detection, peak fitting, and rescaling.

Realizations are keyed by (master_seed, w_index, realization_index), so
the sweep output is bit-identical for any worker count: workers only
change how blocks of realizations are scheduled, never what any block
computes, and blocks are reduced in index order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .config import SweepConfig
from .model import (
    ChainParams,
    build_effective_hamiltonian,
    build_hamiltonian,
    derive_seed,
    sample_disorder,
)
from .spectral import SpectralError, eig_biorthogonal
from .theory import (
    C_FAMILY_ALPHA_MAX,
    effective_hopping,
    w1_alpha,
    w_gap_alpha,
)
from .transport import (
    TransportError,
    lindblad_steady_current,
    steady_current,
    transfer_time_diag,
    transfer_time_full,
    transfer_time_max,
    typical_current,
)

WORKERS_ENV_VAR = "DETCHAIN_WORKERS"


class HarnessError(RuntimeError):
    """Sweep orchestration failure."""


class PeakFitError(HarnessError):
    """The current curve has no usable parabolic maximum."""


@dataclass(frozen=True)
class SweepRow:
    """Aggregated statistics for one (disorder strength, method) cell."""

    w: float
    method: str
    i_typ: float
    ln_i_std: float
    n_ok: int
    n_divergent: int
    n_failed: int = 0

    @property
    def valid(self) -> bool:
        return math.isfinite(self.i_typ)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Sweep output: aggregated rows plus the per-realization currents
    they were reduced from (nan marks a failed realization)."""

    config: SweepConfig
    rows: tuple[SweepRow, ...]
    currents: dict[tuple[int, str], np.ndarray]
    provenance: dict

    def method_rows(self, method: str) -> list[SweepRow]:
        return [r for r in self.rows if r.method == method]


@dataclass(frozen=True)
class DetWindow:
    """Location of the disorder-enhanced-transport window: the interior
    minimum of the smoothed ln-current and the following maximum."""

    w_min_loc: float
    w_max_loc: float
    index_min: int
    index_max: int
    ratio: float  # smoothed I(max) / I(min)


@dataclass(frozen=True)
class PeakFit:
    """Parabolic fit of the current maximum in (ln W, ln I)."""

    w_fit: float
    errorbar: float
    fit_window: tuple[int, ...]
    curvature: float


def _eval_realization(chain: ChainParams, w: float, seed: int, index: int,
                      methods: Sequence[str]) -> dict[str, float]:
    """Currents for one realization; nan marks a per-method failure."""
    out: dict[str, float] = {}
    disorder = sample_disorder(chain, w, seed, index)
    eig_methods = [m for m in methods if m != "lindblad"]
    if eig_methods:
        try:
            h_eff = build_effective_hamiltonian(
                build_hamiltonian(chain, disorder), chain.gamma_drain
            )
            spec = eig_biorthogonal(h_eff)
        except (SpectralError, np.linalg.LinAlgError):
            spec = None
        for m in eig_methods:
            if spec is None:
                out[m] = math.nan
                continue
            try:
                if m == "full":
                    tau = transfer_time_full(spec, chain.gamma_drain, chain.hbar)
                elif m == "diag":
                    tau = transfer_time_diag(spec, chain.gamma_drain, chain.hbar)
                else:
                    tau, _ = transfer_time_max(spec, chain.gamma_drain, chain.hbar)
                out[m] = steady_current(tau, chain.gamma_pump, chain.hbar)
            except TransportError:
                out[m] = math.nan
    if "lindblad" in methods:
        try:
            out["lindblad"] = lindblad_steady_current(chain, disorder).current
        except (TransportError, np.linalg.LinAlgError):
            out["lindblad"] = math.nan
    return out


def _sweep_block(config: SweepConfig, wi: int, r_start: int, r_stop: int):
    """Worker task: realizations [r_start, r_stop) at grid point wi.

    BLAS is pinned to one thread so results do not depend on whether a
    block runs in the parent process or in a pool worker.
    """
    w = config.w_grid[wi]
    w_seed = derive_seed(config.master_seed, wi)
    block = {m: np.empty(r_stop - r_start) for m in config.methods}
    with threadpool_limits(limits=1):
        for r in range(r_start, r_stop):
            vals = _eval_realization(config.chain, w, w_seed, r, config.methods)
            for m in config.methods:
                block[m][r - r_start] = vals[m]
    return wi, r_start, block


def resolve_workers(config: SweepConfig) -> int:
    requested = config.workers if config.workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get(WORKERS_ENV_VAR)
    if cap is not None:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError as exc:
            raise HarnessError(f"bad {WORKERS_ENV_VAR}={cap!r}: {exc}") from None
    return max(1, requested)


def _block_plan(config: SweepConfig, workers: int) -> list[tuple[int, int, int]]:
    n_w = len(config.w_grid)
    blocks_per_w = max(1, (workers * 4) // n_w) if workers > 1 else 1
    size = max(1, math.ceil(config.n_realizations / blocks_per_w))
    plan = []
    for wi in range(n_w):
        for r0 in range(0, config.n_realizations, size):
            plan.append((wi, r0, min(r0 + size, config.n_realizations)))
    return plan


def run_sweep(config: SweepConfig) -> SweepResult:
    """Run the disorder sweep and aggregate typical currents.

    Per-realization failures are recorded, not fatal; a (w, method)
    row with more than 50% failures is marked invalid (i_typ = nan).
    """
    workers = resolve_workers(config)
    plan = _block_plan(config, workers)
    results = {}
    if workers == 1:
        for task in plan:
            wi, r0, block = _sweep_block(config, *task)
            results[(wi, r0)] = block
    else:
        # spawn (not fork) so worker BLAS state is initialized fresh
        ctx = get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = [pool.submit(_sweep_block, config, *task) for task in plan]
            for fut in futures:
                wi, r0, block = fut.result()
                results[(wi, r0)] = block

    currents: dict[tuple[int, str], np.ndarray] = {}
    for wi in range(len(config.w_grid)):
        starts = sorted(r0 for (i, r0) in results if i == wi)
        for m in config.methods:
            currents[(wi, m)] = np.concatenate(
                [results[(wi, r0)][m] for r0 in starts]
            )

    rows = []
    for wi, w in enumerate(config.w_grid):
        for m in config.methods:
            arr = currents[(wi, m)]
            failed = int(np.count_nonzero(np.isnan(arr)))
            ok_arr = arr[~np.isnan(arr)]
            if failed * 2 > config.n_realizations or ok_arr.size == 0:
                rows.append(SweepRow(w, m, math.nan, math.nan, 0,
                                     int(np.count_nonzero(ok_arr == 0.0)), failed))
                continue
            stats = typical_current(ok_arr)
            rows.append(
                SweepRow(
                    w=w,
                    method=m,
                    i_typ=stats.value,
                    ln_i_std=stats.ln_std,
                    n_ok=stats.n_used,
                    n_divergent=stats.n_zero,
                    n_failed=failed,
                )
            )

    provenance = {
        "config_hash": config.config_hash(),
        "master_seed": config.master_seed,
        "version": __version__,
    }
    return SweepResult(config=config, rows=tuple(rows), currents=currents,
                       provenance=provenance)


def sweep_result_from_rows(rows: Sequence[SweepRow],
                           chain: Optional[ChainParams] = None) -> SweepResult:
    """Wrap bare rows (e.g. loaded from a CSV) for the analysis passes.

    The chain is only needed for rescaling; detection and fitting work
    on the rows alone.
    """
    if not rows:
        raise HarnessError("no sweep rows")
    methods = tuple(dict.fromkeys(r.method for r in rows))
    w_grid = tuple(sorted({r.w for r in rows}))
    config = SweepConfig(
        chain=chain if chain is not None else ChainParams(n_sites=4, alpha=1.0),
        w_grid=w_grid,
        n_realizations=max(1, max(r.n_ok + r.n_divergent for r in rows)),
        methods=methods,
    )
    ordered = tuple(sorted(rows, key=lambda r: (r.method, r.w)))
    return SweepResult(config=config, rows=ordered, currents={}, provenance={})


def _smooth3(y: np.ndarray) -> np.ndarray:
    """3-point moving average with one-sided windows at the edges."""
    out = np.empty_like(y)
    for i in range(y.size):
        lo, hi = max(0, i - 1), min(y.size, i + 2)
        out[i] = y[lo:hi].mean()
    return out


def detect_det_window(result: SweepResult, method: str = "full") -> Optional[DetWindow]:
    """Interior local minimum of ln I_typ followed by a local maximum.

    Works on the 3-point smoothed curve; returns None for a curve that
    decays monotonically (no DET window).  Indices refer to positions
    in the method's valid-row list, ascending in W.
    """
    rows = [r for r in result.method_rows(method) if r.valid and r.i_typ > 0.0]
    if len(rows) < 7:
        raise HarnessError(
            f"window detection needs at least 7 valid grid points, got {len(rows)}"
        )
    w = np.array([r.w for r in rows])
    y = _smooth3(np.log(np.array([r.i_typ for r in rows])))
    interior = range(1, y.size - 1)
    minima = [i for i in interior if y[i] <= y[i - 1] and y[i] <= y[i + 1]]
    maxima = [j for j in interior if y[j] >= y[j - 1] and y[j] >= y[j + 1]]
    for i in minima:
        later = [j for j in maxima if j > i and y[j] > y[i]]
        if later:
            j = max(later, key=lambda k: y[k])
            return DetWindow(
                w_min_loc=float(w[i]),
                w_max_loc=float(w[j]),
                index_min=i,
                index_max=j,
                ratio=float(np.exp(y[j] - y[i])),
            )
    return None


def fit_peak(result: SweepResult, method: str = "full") -> PeakFit:
    """Parabola through the 5 grid points around the detected maximum of
    ln I_typ vs ln W; the vertex gives the fitted peak position."""
    window = detect_det_window(result, method)
    if window is None:
        raise PeakFitError("no local maximum to fit")
    rows = [r for r in result.method_rows(method) if r.valid and r.i_typ > 0.0]
    w = np.array([r.w for r in rows])
    y = np.log(np.array([r.i_typ for r in rows]))
    j = window.index_max
    lo = max(0, min(j - 2, w.size - 5))
    sel = slice(lo, lo + 5)
    if lo + 5 > w.size:
        raise PeakFitError("fewer than 5 grid points around the maximum")
    coeffs = np.polyfit(np.log(w[sel]), y[sel], 2)
    curvature = 2.0 * coeffs[0]
    if not curvature < 0.0:
        raise PeakFitError(f"fit is not concave (curvature {curvature:.3e})")
    w_fit = float(np.exp(-coeffs[1] / (2.0 * coeffs[0])))
    if not (w[sel][0] <= w_fit <= w[sel][-1]):
        raise PeakFitError(
            f"parabola vertex {w_fit:.6g} falls outside the fit window "
            f"[{w[sel][0]:.6g}, {w[sel][-1]:.6g}]"
        )
    right = int(np.searchsorted(w, w_fit))
    right = min(max(right, 1), w.size - 1)
    errorbar = 0.5 * (w[right] - w[right - 1])
    return PeakFit(
        w_fit=w_fit,
        errorbar=float(errorbar),
        fit_window=tuple(range(lo, lo + 5)),
        curvature=float(curvature),
    )


RESCALE_CHOICES = ("w1_alpha", "w_gap_alpha", "omega_alpha", "one")


def rescale_factor(chain: ChainParams, scale: str) -> float:
    """Disorder-axis scale factor for collapse plots."""
    if scale == "one":
        return 1.0
    if scale == "omega_alpha":
        hop = effective_hopping(chain.alpha, chain.gamma)
        if hop <= 0.0:
            raise HarnessError("omega_alpha rescaling undefined at alpha = 0")
        return hop
    if scale == "w1_alpha":
        value = w1_alpha(chain.n_sites, chain.alpha, chain.gamma)
        if value <= 0.0:
            raise HarnessError("w1_alpha rescaling undefined at alpha = 0")
        return value
    if scale == "w_gap_alpha":
        if chain.alpha >= C_FAMILY_ALPHA_MAX:
            raise HarnessError(
                f"w_gap_alpha rescaling not applicable for alpha = {chain.alpha} "
                f">= {C_FAMILY_ALPHA_MAX}"
            )
        return w_gap_alpha(chain.n_sites, chain.alpha, chain.gamma)
    raise HarnessError(f"unknown scale {scale!r}; choose from {RESCALE_CHOICES}")


def curve_label(chain: ChainParams) -> str:
    return f"N={chain.n_sites} alpha={chain.alpha:g} gamma={chain.gamma:g}"


def rescale_curves(results: Sequence[SweepResult], scale: str,
                   method: str = "full") -> list[dict]:
    """Overlay table (W / scale, hbar I_typ / gamma) for collapse tests."""
    table = []
    for result in results:
        chain = result.config.chain
        factor = rescale_factor(chain, scale)
        for row in result.method_rows(method):
            if not row.valid:
                continue
            table.append(
                {
                    "curve": curve_label(chain),
                    "w": row.w,
                    "w_scaled": row.w / factor,
                    "i_typ": row.i_typ,
                    "i_typ_scaled": chain.hbar * row.i_typ / chain.gamma,
                    "method": row.method,
                }
            )
    return table
