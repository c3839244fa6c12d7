"""Cross-method oracle and identity checks, runnable from the CLI.

The quick tier runs the small-chain method triangle (eigenbasis vs
time propagation vs master equation); the full tier adds spectral and
closed-form identities and the determinism contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SweepConfig
from .harness import run_sweep
from .model import (
    ChainParams,
    build_clean_periodic,
    build_effective_hamiltonian,
    build_hamiltonian,
    sample_disorder,
)
from .spectral import eig_biorthogonal, eig_hermitian
from .theory import (
    eq_lr_spectrum,
    gamma_critical,
    spectral_radius_limit,
    spectral_radius_sum,
    w_gap_alpha,
)
from .output import sweep_csv_text
from .transport import (
    lindblad_steady_current,
    steady_current,
    transfer_time_diag,
    transfer_time_full,
    transfer_time_propagation,
)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def _outcome(name: str, passed: bool, detail: str) -> CheckOutcome:
    return CheckOutcome(name=name, passed=bool(passed), detail=detail)


def oracle_triangle(seed: int = 20260809, cases: int = 6) -> list[CheckOutcome]:
    """Eigenbasis vs propagation vs master equation on random small chains."""
    rng = np.random.default_rng(seed)
    outcomes = []
    for i in range(cases):
        n = int(rng.integers(2, 11))
        alpha = float(rng.choice([1 / 3, 1.0, 2.0]))
        w = float(rng.choice([0.1, 1.0]))
        params = ChainParams(n_sites=n, alpha=alpha)
        disorder = sample_disorder(params, w, seed + i, 0)
        h_eff = build_effective_hamiltonian(
            build_hamiltonian(params, disorder), params.gamma_drain
        )
        spec = eig_biorthogonal(h_eff)
        tau = transfer_time_full(spec, params.gamma_drain)
        tau_prop = transfer_time_propagation(h_eff, params.gamma_drain)
        rel_tau = abs(tau - tau_prop) / tau
        current = steady_current(tau, params.gamma_pump)
        current_me = lindblad_steady_current(params, disorder).current
        rel_i = abs(current - current_me) / abs(current)
        label = f"n={n} alpha={alpha:.3g} W={w:g}"
        outcomes.append(
            _outcome(
                f"oracle triangle [{label}]",
                rel_tau <= 1e-6 and rel_i <= 1e-6,
                f"tau rel {rel_tau:.2e}, current rel {rel_i:.2e}",
            )
        )
    return outcomes


def identity_checks(seed: int = 1) -> list[CheckOutcome]:
    outcomes = []
    rng = np.random.default_rng(seed)

    # eigenbasis reconstruction and trace identity on a random chain
    params = ChainParams(n_sites=24, alpha=0.5)
    disorder = sample_disorder(params, 2.0, seed, 0)
    h_eff = build_effective_hamiltonian(build_hamiltonian(params, disorder), 1.0)
    spec = eig_biorthogonal(h_eff)
    recon = (spec.right_vectors * spec.eigenvalues) @ spec.left_vectors
    rel = np.linalg.norm(recon - h_eff) / np.linalg.norm(h_eff)
    outcomes.append(_outcome("eigenbasis reconstruction", rel <= 1e-8, f"rel {rel:.2e}"))

    trace_gap = abs(spec.widths.sum() - 0.5)
    outcomes.append(_outcome("width trace identity", trace_gap <= 1e-10, f"gap {trace_gap:.2e}"))

    forms_gap = 0.0
    try:
        transfer_time_diag(spec, 1.0)
    except Exception as exc:  # the op itself cross-checks both forms
        forms_gap = math.inf
    outcomes.append(_outcome("diagonal-time algebraic forms", forms_gap == 0.0, "cross-check"))

    # widths against drain-site overlaps under conventional normalization
    norms = np.sum(np.abs(spec.right_vectors) ** 2, axis=0)
    overlap_widths = 0.5 * np.abs(spec.right_vectors[-1, :]) ** 2 / norms
    width_gap = float(np.abs(overlap_widths - spec.widths).max())
    outcomes.append(
        _outcome("width-overlap identity", width_gap <= 1e-8, f"max gap {width_gap:.2e}")
    )

    # clean periodic spectrum vs closed form, and the band-width sum
    for n, alpha in ((16, 1.5), (9, 0.5)):
        p = ChainParams(n_sites=n, alpha=alpha, boundary="periodic")
        direct = np.sort(np.linalg.eigvalsh(build_clean_periodic(p)))
        closed = np.sort(eq_lr_spectrum(n, alpha))
        gap = float(np.abs(direct - closed).max())
        outcomes.append(
            _outcome(f"clean periodic spectrum (N={n}, alpha={alpha})", gap <= 1e-10, f"{gap:.2e}")
        )
    direct = eq_lr_spectrum(16, 2.0)
    radius_gap = abs((direct.max() - direct.min()) - spectral_radius_sum(16, 2.0))
    outcomes.append(_outcome("band-width sum identity", radius_gap <= 1e-10, f"{radius_gap:.2e}"))
    tail = abs(spectral_radius_sum(3200, 3.0) - spectral_radius_limit(3.0)) / spectral_radius_limit(3.0)
    outcomes.append(_outcome("band-width large-N limit", tail <= 1e-3, f"rel {tail:.2e}"))

    # threshold inversion: w_gap_alpha evaluated at gamma_cr returns W
    w = 7.5
    inv = w_gap_alpha(3200, 1 / 3, gamma_critical(w, 3200, 1 / 3))
    outcomes.append(_outcome("gap threshold inversion", abs(inv - w) <= 1e-9 * w, f"{inv:.6f}"))

    # all-to-all clean chain must flag the dark-state divergence
    p0 = ChainParams(n_sites=6, alpha=0.0)
    d0 = sample_disorder(p0, 0.0, 0, 0)
    spec0 = eig_biorthogonal(build_effective_hamiltonian(build_hamiltonian(p0, d0), 1.0))
    tau0 = transfer_time_full(spec0, 1.0)
    outcomes.append(_outcome("all-to-all dark-state divergence", math.isinf(tau0), f"tau {tau0}"))

    # disorder sampler uniformity (Kolmogorov-Smirnov style bound)
    n_draws = 20000
    draws = sample_disorder(ChainParams(n_sites=n_draws, alpha=1.0), 2.0, seed, 1).energies
    sorted_u = np.sort((draws + 1.0) / 2.0)
    grid = np.arange(1, n_draws + 1) / n_draws
    ks = float(np.max(np.abs(sorted_u - grid)))
    bound = 2.0 / math.sqrt(n_draws) * 1.63
    outcomes.append(_outcome("disorder uniformity", ks < bound, f"KS {ks:.4f} < {bound:.4f}"))

    # Hermitian limit: vanishing drain reproduces the symmetric spectrum
    h = build_hamiltonian(params, disorder)
    herm = eig_hermitian(h)
    tiny = eig_biorthogonal(build_effective_hamiltonian(h, 1e-30))
    lim_gap = float(np.abs(tiny.eigenvalues.real - herm.eigenvalues).max())
    outcomes.append(_outcome("Hermitian limit", lim_gap <= 1e-10, f"max gap {lim_gap:.2e}"))

    return outcomes


def determinism_check(seed: int = 3) -> list[CheckOutcome]:
    chain = ChainParams(n_sites=12, alpha=1 / 3)
    kwargs = dict(
        chain=chain,
        w_grid=(0.5, 1.0, 2.0),
        n_realizations=6,
        master_seed=seed,
        methods=("full", "diag"),
    )
    serial = sweep_csv_text(run_sweep(SweepConfig(workers=1, **kwargs)))
    parallel = sweep_csv_text(run_sweep(SweepConfig(workers=2, **kwargs)))
    repeat = sweep_csv_text(run_sweep(SweepConfig(workers=1, **kwargs)))
    return [
        _outcome("determinism across worker counts", serial == parallel, "csv bytes"),
        _outcome("determinism across repeated runs", serial == repeat, "csv bytes"),
    ]


def run_validation(quick: bool = False, seed: int = 20260809) -> list[CheckOutcome]:
    outcomes = oracle_triangle(seed=seed, cases=4 if quick else 8)
    if not quick:
        outcomes += identity_checks()
        outcomes += determinism_check()
    return outcomes
