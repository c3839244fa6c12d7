"""Matplotlib rendering of sweep curves, gap scans, state profiles, and
collapse overlays.  Figures are written straight to files (Agg backend);
nothing here is needed for the numerical pipeline."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import StateProfile
from .harness import DetWindow, SweepResult, curve_label

_METHOD_STYLE = {
    "full": dict(color="black", marker="o"),
    "diag": dict(color="tab:pink", marker="s"),
    "max": dict(color="tab:orange", marker="x"),
    "lindblad": dict(color="tab:blue", marker="^"),
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_sweep(result: SweepResult, path: str | Path,
               window: Optional[DetWindow] = None) -> Path:
    """Typical current vs disorder strength, one series per method.

    Error bars show the multiplicative spread exp(+-std ln I).
    """
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    chain = result.config.chain
    for method in result.config.methods:
        rows = [r for r in result.method_rows(method) if r.valid and r.i_typ > 0]
        if not rows:
            continue
        w = np.array([r.w for r in rows])
        i_typ = np.array([r.i_typ for r in rows])
        spread = np.array([r.ln_i_std for r in rows])
        yerr = np.vstack([i_typ * (1 - np.exp(-spread)), i_typ * (np.expm1(spread))])
        style = _METHOD_STYLE.get(method, {})
        ax.errorbar(w, i_typ, yerr=yerr, ls="-", ms=4, lw=1, capsize=2,
                    label=method, **style)
    if window is not None:
        ax.axvline(window.w_min_loc, color="gray", ls=":", lw=1)
        ax.axvline(window.w_max_loc, color="gray", ls="--", lw=1)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$W/\gamma$")
    ax.set_ylabel(r"$\hbar\, I^{typ}/\gamma$")
    ax.set_title(curve_label(chain))
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_rescaled(table: Sequence[dict], path: str | Path, scale: str) -> Path:
    """Overlay of rescaled sweep curves from rescale_curves output."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    curves: dict[str, list[tuple[float, float]]] = {}
    for row in table:
        curves.setdefault(row["curve"], []).append((row["w_scaled"], row["i_typ_scaled"]))
    for label, points in curves.items():
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, "o-", ms=3, lw=1, label=label)
    ax.axvline(1.0, color="gray", ls=":", lw=1)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(f"$W$ / {scale}")
    ax.set_ylabel(r"$\hbar\, I^{typ}/\gamma$")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_gap(rows: Sequence[dict], path: str | Path,
             gamma_cr: Optional[float] = None, level_spacing: Optional[float] = None) -> Path:
    """Numerical gap and its closed-form estimate vs hopping strength."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    gammas = np.array([row["gamma"] for row in rows])
    ax.plot(gammas, [row["gap_numeric"] for row in rows], "o", color="black",
            ms=4, label="numerical")
    ax.plot(gammas, [row["gap_theory"] for row in rows], "--", color="tab:red",
            lw=1.2, label="estimate")
    if level_spacing is not None:
        ax.axhline(level_spacing, color="gray", ls=":", lw=1, label=r"$W/N$")
    if gamma_cr is not None:
        ax.axvline(gamma_cr, color="tab:green", ls="-.", lw=1, label=r"$\gamma_{cr}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"$\Delta$")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_profiles(profiles: Sequence[StateProfile], path: str | Path) -> Path:
    """Site-basis probability of the most conducting state, one line per
    disorder strength."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for prof in profiles:
        sites = np.arange(1, prof.probabilities.size + 1)
        ax.semilogy(sites, prof.probabilities, lw=1,
                    label=f"W={prof.width:g}" + (" (divergent)" if prof.divergent else ""))
    ax.set_xlabel("site")
    ax.set_ylabel(r"$|\psi(k)|^2$")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_pr_collapse(rows: Sequence[dict], path: str | Path) -> Path:
    """Normalized participation ratio vs rescaled disorder strength."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    curves: dict[tuple, list[tuple[float, float]]] = {}
    for row in rows:
        key = (row["alpha"], row["n_sites"])
        curves.setdefault(key, []).append((row["w_over_hop"], row["pr_over_n"]))
    for (alpha, n), points in sorted(curves.items()):
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, "o-", ms=3, lw=1, label=rf"$\alpha$={alpha:g}, N={n}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$W/\Omega_\alpha$")
    ax.set_ylabel("PR / N")
    ax.legend(fontsize=8)
    return _save(fig, path)
