"""Transfer times and steady-state currents.

Main route: expand the propagator of the effective Hamiltonian on its
biorthogonal eigenbasis and integrate the drain-site population
analytically, giving the double-sum transfer time and its diagonal and
single-state reductions.  Two independent oracles cross-check it: direct
time propagation under the effective Hamiltonian and the full master
equation steady state on the vacuum + single-excitation space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .model import (
    OPEN,
    ChainParams,
    DisorderRealization,
    build_effective_hamiltonian,
    build_hamiltonian,
)
from .spectral import BiorthogonalSpectrum, eig_biorthogonal

#: a width below WIDTH_FLOOR * gamma_drain counts as numerically dark
WIDTH_FLOOR = 1e-13

#: minimum pump-site overlap for a dark state to force a divergent time
PUMP_OVERLAP_FLOOR = 1e-13

DARK_STATE_DIVERGENCE = "dark_state_divergence"
DEGENERATE_PAIR = "degenerate_pair"


class TransportError(RuntimeError):
    """Transport evaluation violated one of its internal cross-checks."""


class PropagationError(TransportError):
    """Time propagation did not converge before t_max."""


@dataclass(frozen=True, eq=False)
class TransportResult:
    """Transfer times and current for one disorder realization."""

    tau_full: float
    tau_diag: float
    tau_max: float
    tau_max_index: int
    current: float
    flags: frozenset[str] = frozenset()


@dataclass(frozen=True, eq=False)
class LindbladResult:
    """Steady state of the master equation over {vacuum, sites}."""

    steady_state: np.ndarray
    current: float


class TypicalCurrent(NamedTuple):
    """Geometric mean of positive currents with the spread of ln I."""

    value: float
    ln_std: float
    n_used: int
    n_zero: int


def _site_overlaps(spec: BiorthogonalSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """(<N|r_k>, <l_k|1>) for every eigenstate."""
    drain = spec.right_vectors[-1, :]
    pump = spec.left_vectors[:, 0]
    return drain, pump


def _dark_divergent(spec: BiorthogonalSpectrum, gamma_drain: float) -> tuple[np.ndarray, bool]:
    """Dark-state mask and whether any dark state couples to the pump site."""
    _, pump = _site_overlaps(spec)
    dark = spec.widths < WIDTH_FLOOR * gamma_drain
    divergent = bool(np.any(dark & (np.abs(pump) ** 2 > PUMP_OVERLAP_FLOOR)))
    return dark, divergent


def transfer_time_full(spec: BiorthogonalSpectrum, gamma_drain: float, hbar: float = 1.0) -> float:
    """Average transfer time from the full double sum over eigenstate pairs.

    Returns math.inf when a numerically dark state overlaps the pump
    site (the excitation can never fully drain).
    """
    drain, pump = _site_overlaps(spec)
    dark, divergent = _dark_divergent(spec, gamma_drain)
    if divergent:
        return math.inf
    amp = drain * pump
    amp = np.where(dark, 0.0, amp)  # dark states are decoupled from the pump
    diff = spec.eigenvalues[:, None] - np.conj(spec.eigenvalues)[None, :]
    denom = -(diff**2)
    # both-dark pairs have amp == 0; keep the denominator finite there
    denom = np.where(np.abs(denom) == 0.0, 1.0, denom)
    total = np.sum(np.outer(amp, np.conj(amp)) / denom)
    tau = hbar * gamma_drain * total.real
    if abs(total.imag) > 1e-6 * max(abs(total.real), 1e-300):
        raise TransportError(
            f"transfer-time sum has a non-real residue: {total:.6e}"
        )
    return float(tau)


def diagonal_transfer_terms(spec: BiorthogonalSpectrum, gamma_drain: float, hbar: float = 1.0) -> np.ndarray:
    """Per-state terms of the diagonal transfer-time sum (0 for states
    decoupled from the pump, inf for dark states that do couple)."""
    drain, pump = _site_overlaps(spec)
    dark = spec.widths < WIDTH_FLOOR * gamma_drain
    amp2 = np.abs(drain * pump) ** 2
    terms = np.zeros(spec.n)
    bright = ~dark
    terms[bright] = hbar * gamma_drain * amp2[bright] / (4.0 * spec.widths[bright] ** 2)
    terms[dark & (np.abs(pump) ** 2 > PUMP_OVERLAP_FLOOR)] = math.inf
    return terms


def transfer_time_diag(spec: BiorthogonalSpectrum, gamma_drain: float, hbar: float = 1.0) -> float:
    """Diagonal (k = k') part of the transfer-time sum.

    Evaluated in two algebraically equivalent forms, one from the
    eigenvalue widths and one from eigenvector overlap ratios; a
    mismatch beyond 1e-8 relative signals a bad decomposition.
    """
    dark, divergent = _dark_divergent(spec, gamma_drain)
    if divergent:
        return math.inf
    terms = diagonal_transfer_terms(spec, gamma_drain, hbar)
    form_widths = float(np.sum(terms))

    drain, pump = _site_overlaps(spec)
    bright = ~dark
    norms = np.sum(np.abs(spec.right_vectors[:, bright]) ** 2, axis=0)
    form_overlaps = float(
        hbar
        / gamma_drain
        * np.sum(norms**2 * np.abs(pump[bright]) ** 2 / np.abs(drain[bright]) ** 2)
    )
    # The eigenvalue imaginary parts carry an absolute error of order
    # n * eps * |H|; terms with small widths inherit it quadratically,
    # so the comparison gets a conditioning allowance on top of the
    # 1e-8 floor.
    scale_h = float(np.abs(spec.eigenvalues).max()) if spec.n else 0.0
    width_err = spec.n * np.finfo(float).eps * scale_h
    allowance = 2.0 * float(np.sum(terms[bright] * (width_err / spec.widths[bright])))
    bound = 1e-8 * max(abs(form_widths), abs(form_overlaps)) + allowance
    if abs(form_widths - form_overlaps) > bound:
        raise TransportError(
            f"diagonal transfer-time forms disagree: {form_widths:.12e} vs "
            f"{form_overlaps:.12e} (allowed {bound:.3e})"
        )
    return form_widths


def transfer_time_max(
    spec: BiorthogonalSpectrum, gamma_drain: float, hbar: float = 1.0
) -> tuple[float, int]:
    """Largest single diagonal term and the eigenstate index attaining it.

    Ties break toward the smallest index; a divergent dark state wins
    outright.
    """
    terms = diagonal_transfer_terms(spec, gamma_drain, hbar)
    k = int(np.argmax(terms))  # argmax returns the first maximal entry
    return float(terms[k]), k


def steady_current(tau: float, gamma_pump: float, hbar: float = 1.0) -> float:
    """Steady-state current fed by pumping at rate gamma_pump against a
    transfer time tau; divergent tau carries zero current."""
    if not (tau > 0.0):
        raise TransportError(f"transfer time must be positive, got {tau}")
    if math.isinf(tau) or gamma_pump == 0.0:
        return 0.0
    return gamma_pump / (tau * gamma_pump + hbar)


def transport_result(
    spec: BiorthogonalSpectrum, params: ChainParams
) -> TransportResult:
    """Evaluate every eigenbasis transfer time and the resulting current."""
    gd, hb = params.gamma_drain, params.hbar
    tau_full = transfer_time_full(spec, gd, hb)
    tau_diag = transfer_time_diag(spec, gd, hb)
    tau_max, k_max = transfer_time_max(spec, gd, hb)
    flags = set()
    if math.isinf(tau_full):
        flags.add(DARK_STATE_DIVERGENCE)
    if spec.degenerate_pairs:
        flags.add(DEGENERATE_PAIR)
    return TransportResult(
        tau_full=tau_full,
        tau_diag=tau_diag,
        tau_max=tau_max,
        tau_max_index=k_max,
        current=steady_current(tau_full, params.gamma_pump, hb),
        flags=frozenset(flags),
    )


def _propagation_integral(
    h_eff: np.ndarray,
    dt: float,
    steps_total: int,
    survival_tol: float,
) -> tuple[float, float, int]:
    """Trapezoid integral of t * |psi_N(t)|^2 on a fixed time grid.

    Returns (integral, final survival probability, steps taken).  The
    state starts on site 1 and is advanced by repeated application of
    the one-step propagator (scaled-and-squared matrix exponential).
    Stops early once the survival probability drops below survival_tol.
    """
    n = h_eff.shape[0]
    u = scipy.linalg.expm(-1j * h_eff * dt)
    # stack of chunk powers, powers[m] = u^(m+1), flattened so that one
    # matrix-vector product advances a whole chunk of time steps; the
    # stack is sized to stay cache-resident (~1 MB)
    chunk = min(max(256, (1 << 20) // max(16 * n * n, 1)), steps_total)
    powers = np.empty((chunk, n, n), dtype=complex)
    powers[0] = u
    for m in range(1, chunk):
        powers[m] = powers[m - 1] @ u
    powers_flat = powers.reshape(chunk * n, n)

    psi = np.zeros(n, dtype=complex)
    psi[0] = 1.0
    f_sum = 0.0  # t = 0 contributes t*|psi_N|^2 = 0
    f_last = 0.0
    done = 0
    while done < steps_total:
        take = min(chunk, steps_total - done)
        states = (powers_flat[: take * n] @ psi).reshape(take, n)
        times = dt * (done + np.arange(1, take + 1))
        f_vals = times * np.abs(states[:, -1]) ** 2
        f_sum += float(f_vals.sum())
        f_last = float(f_vals[-1])
        psi = states[-1]
        done += take
        survival = float(np.sum(np.abs(psi) ** 2))
        if survival < survival_tol:
            break
    integral = dt * (f_sum - 0.5 * f_last)
    return integral, float(np.sum(np.abs(psi) ** 2)), done


def transfer_time_propagation(
    h_eff: np.ndarray,
    gamma_drain: float,
    t_max: float = 1e7,
    dt: float = 0.01,
    hbar: float = 1.0,
    survival_tol: float = 1e-12,
    max_n: int = 64,
) -> float:
    """Transfer time from direct time propagation (independent oracle).

    Integrates (gamma_drain/hbar) * Int t |psi_N(t)|^2 dt on a fixed
    grid with step dt, with a second pass at dt/2 and Richardson
    extrapolation to cancel the leading trapezoid error.  Truncates
    once the survival probability drops below survival_tol; if it is
    still above 1e-6 at t_max the tail is not converged and a
    PropagationError is raised.
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    n = h_eff.shape[0]
    if n > max_n:
        raise TransportError(
            f"propagation oracle limited to n <= {max_n} sites, got {n}"
        )
    # work in the scaled time s = t / hbar so the propagator uses h_eff as is
    s_step = dt / hbar
    steps = int(math.ceil((t_max / hbar) / s_step))
    coarse, survival, done = _propagation_integral(h_eff, s_step, steps, survival_tol)
    if survival > 1e-6:
        raise PropagationError(
            f"survival probability {survival:.3e} above 1e-6 at t_max={t_max:g}"
        )
    # same window at half the step, then Richardson extrapolation
    fine, _, _ = _propagation_integral(h_eff, 0.5 * s_step, 2 * done, 0.0)
    integral = (4.0 * fine - coarse) / 3.0
    return float(gamma_drain * hbar * integral)


def _vacuum_site_space(params: ChainParams, disorder: DisorderRealization) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extended Hamiltonian and jump operators on {|0>, |1>, ..., |N>}."""
    n = params.n_sites
    h = build_hamiltonian(params, disorder)
    h_full = np.zeros((n + 1, n + 1))
    h_full[1:, 1:] = h
    l_pump = np.zeros((n + 1, n + 1))
    l_pump[1, 0] = math.sqrt(params.gamma_pump / (2.0 * params.hbar))
    l_drain = np.zeros((n + 1, n + 1))
    l_drain[0, n] = math.sqrt(params.gamma_drain / (2.0 * params.hbar))
    return h_full, l_pump, l_drain


def build_liouvillian(params: ChainParams, disorder: DisorderRealization) -> np.ndarray:
    """Dense Liouvillian over the vacuum + single-excitation space.

    Column-stacking convention: L acts on vec(rho) with
    vec(A rho B) = kron(B.T, A) vec(rho).  The dissipators enter as
    -{L+L, rho} + 2 L rho L+.
    """
    h_full, l_pump, l_drain = _vacuum_site_space(params, disorder)
    dim = h_full.shape[0]
    eye = np.eye(dim)
    liou = -1j / params.hbar * (np.kron(eye, h_full) - np.kron(h_full.T, eye))
    liou = liou.astype(complex)
    for lop in (l_pump, l_drain):
        ldl = lop.T.conj() @ lop
        liou += 2.0 * np.kron(lop.conj(), lop)
        liou -= np.kron(eye, ldl)
        liou -= np.kron(ldl.T, eye)
    return liou


def lindblad_steady_current(
    params: ChainParams, disorder: DisorderRealization, max_n: int = 24
) -> LindbladResult:
    """Steady state of the master equation and the drained current.

    Solves the (dim^2 + 1) constrained linear system (null vector of the
    Liouvillian with unit trace) by dense least squares with iterative
    refinement; raises TransportError if the steady state is not unique.
    """
    n = params.n_sites
    if n > max_n:
        raise TransportError(f"master-equation oracle limited to n <= {max_n}, got {n}")
    if params.boundary != OPEN:
        raise TransportError("transport requires open boundary conditions")
    liou = build_liouvillian(params, disorder)
    dim = n + 1

    singular = np.linalg.svd(liou, compute_uv=False)
    null_tol = max(1e-12 * singular[0], 1e-300)
    if singular[-2] < null_tol:
        raise TransportError(
            f"steady state is not unique: two smallest singular values "
            f"{singular[-1]:.3e}, {singular[-2]:.3e}"
        )

    trace_row = np.zeros(dim * dim, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    scale = max(singular[0], 1.0)
    system = np.vstack([liou, scale * trace_row[None, :]])
    rhs = np.zeros(dim * dim + 1, dtype=complex)
    rhs[-1] = scale
    vec, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    for _ in range(2):  # refinement recovers accuracy lost to conditioning
        residual = rhs - system @ vec
        vec += np.linalg.lstsq(system, residual, rcond=None)[0]

    rho = vec.reshape(dim, dim, order="F")
    rho = 0.5 * (rho + rho.T.conj())
    trace = float(rho.trace().real)
    if abs(trace - 1.0) > 1e-8:
        raise TransportError(f"steady-state trace {trace:.12f} deviates from 1")
    rho /= trace
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -1e-10:
        raise TransportError(f"steady state not positive semidefinite: {min_eig:.3e}")
    current = params.gamma_drain / params.hbar * float(rho[n, n].real)
    return LindbladResult(steady_state=rho, current=current)


def typical_current(currents) -> TypicalCurrent:
    """Geometric mean of the positive entries plus the std dev of ln I.

    Zero currents (divergent realizations) are excluded from the mean
    but counted; an all-zero input gives a typical current of 0.
    """
    arr = np.asarray(currents, dtype=float)
    if arr.size == 0:
        raise TransportError("typical_current needs at least one entry")
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise TransportError("currents must be finite and non-negative")
    positive = arr[arr > 0.0]
    n_zero = int(arr.size - positive.size)
    if positive.size == 0:
        return TypicalCurrent(value=0.0, ln_std=math.nan, n_used=0, n_zero=n_zero)
    logs = np.log(positive)
    ln_std = float(np.std(logs, ddof=1)) if logs.size > 1 else 0.0
    return TypicalCurrent(
        value=float(np.exp(logs.mean())),
        ln_std=ln_std,
        n_used=int(positive.size),
        n_zero=n_zero,
    )


def evaluate_realization(
    params: ChainParams, disorder: DisorderRealization
) -> TransportResult:
    """Build, decompose, and evaluate one disorder realization."""
    h = build_hamiltonian(params, disorder)
    h_eff = build_effective_hamiltonian(h, params.gamma_drain)
    spec = eig_biorthogonal(h_eff)
    return transport_result(spec, params)
