"""Closed-form predictors: effective hopping, disorder thresholds, gap
estimates, clean spectra, spectral radii, and the localization length.

Everything here is analytic: the numerical modules are validated against
these expressions, never the other way around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import zeta

from .model import ChainParams

#: constant of the localization-length estimate xi = 105.2 (hop/W)^2
XI_PREFACTOR = 105.2

#: constant under the square root of the first disorder threshold
W1_PREFACTOR = 210.4


class TheoryError(ValueError):
    """Arguments outside the validity domain of a closed form."""


def effective_hopping(alpha: float, gamma: float = 1.0) -> float:
    """Effective nearest-neighbor amplitude of the power-law chain,
    gamma * (1 - 2**-alpha)."""
    if alpha < 0.0:
        raise TheoryError(f"alpha must be >= 0, got {alpha}")
    # -expm1 keeps precision for small alpha and maps alpha=inf to gamma
    return gamma * -math.expm1(-alpha * math.log(2.0))


def w1_alpha(n: int, alpha: float, gamma: float = 1.0) -> float:
    """Disorder threshold where the current stops decreasing,
    hop_eff * sqrt(210.4 ln N / N)."""
    if n < 2:
        raise TheoryError(f"n must be >= 2, got {n}")
    return effective_hopping(alpha, gamma) * math.sqrt(W1_PREFACTOR * math.log(n) / n)


def w1_zero(n: int, omega: float) -> float:
    """All-to-all-limit threshold with explicit nearest-neighbor hopping."""
    if n < 2:
        raise TheoryError(f"n must be >= 2, got {n}")
    if omega <= 0.0:
        raise TheoryError(f"omega must be > 0, got {omega}")
    return omega * math.sqrt(W1_PREFACTOR * math.log(n) / n)


def w2_zero(n: int, omega: float) -> float:
    """Threshold ending the disorder-independent plateau (all-to-all limit)."""
    if n < 2:
        raise TheoryError(f"n must be >= 2, got {n}")
    if omega <= 0.0:
        raise TheoryError(f"omega must be > 0, got {omega}")
    return omega * math.sqrt(W1_PREFACTOR * math.log(n))


def w_gap_zero(n: int, gamma: float = 1.0) -> float:
    """Disorder strength where the all-to-all gap closes, gamma N ln(N) / 2."""
    if n < 2:
        raise TheoryError(f"n must be >= 2, got {n}")
    return 0.5 * gamma * n * math.log(n)


def localization_length(omega: float, w: float) -> float:
    """Localization length of the nearest-neighbor chain, 105.2 (omega/W)^2."""
    if w <= 0.0:
        raise TheoryError(f"disorder width must be > 0, got {w}")
    return XI_PREFACTOR * (omega / w) ** 2


def c_alpha(n: int, alpha: float) -> float:
    """Kernel constant ((N/2)**(1-alpha) - 1) / (1 - alpha).

    Continuous at alpha = 1 with limiting value ln(N/2); evaluated via
    expm1 so the crossover is numerically smooth.
    """
    if n < 4:
        raise TheoryError(f"n must be >= 4, got {n}")
    if alpha < 0.0:
        raise TheoryError(f"alpha must be >= 0, got {alpha}")
    log_half_n = math.log(0.5 * n)
    if alpha == 1.0:
        return log_half_n
    return math.expm1((1.0 - alpha) * log_half_n) / (1.0 - alpha)


def gap_theory(w: float, gamma: float, n: int, alpha: float) -> float:
    """Estimated gap between the detached ground state and the band,
    W / (exp(W / (2 gamma C)) - 1); equals 2 gamma C at W = 0."""
    if w < 0.0:
        raise TheoryError(f"disorder width must be >= 0, got {w}")
    c = c_alpha(n, alpha)
    if w == 0.0:
        return 2.0 * gamma * c
    x = w / (2.0 * gamma * c)
    if x > 700.0:  # expm1 overflows; the -1 is negligible here anyway
        return w * math.exp(-x)
    return w / math.expm1(x)


def w_gap_alpha(n: int, alpha: float, gamma: float = 1.0) -> float:
    """Disorder strength where the gap estimate meets the level spacing,
    2 gamma C ln N; marks the current maximum ending the DET window."""
    if n < 4:
        raise TheoryError(f"n must be >= 4, got {n}")
    return 2.0 * gamma * c_alpha(n, alpha) * math.log(n)


def gamma_critical(w: float, n: int, alpha: float) -> float:
    """Hopping amplitude at which the gap opens for a given disorder,
    the algebraic inverse of w_gap_alpha."""
    if w <= 0.0:
        raise TheoryError(f"disorder width must be > 0, got {w}")
    return w / (2.0 * c_alpha(n, alpha) * math.log(n))


def eq_lr_spectrum(n: int, alpha: float, gamma: float = 1.0) -> np.ndarray:
    """Exact clean spectrum of the periodic power-law chain, indexed by
    the momentum label q = 1..N.

    The circulant eigenvalues are -2 gamma sum_{d=1}^{floor((N-1)/2)}
    cos(2 pi q d / N) / d**alpha, plus the single antipodal term
    -gamma (-1)**q / (N/2)**alpha when N is even.
    """
    if n < 3:
        raise TheoryError(f"n must be >= 3, got {n}")
    q = np.arange(1, n + 1, dtype=float)
    dists = np.arange(1, (n - 1) // 2 + 1, dtype=float)
    weights = dists**-alpha
    phases = np.cos(2.0 * math.pi * np.outer(q, dists) / n)
    energies = -2.0 * gamma * phases @ weights
    if n % 2 == 0:
        with np.errstate(over="ignore"):
            antipode = (0.5 * n) ** alpha
        energies -= gamma * np.where(q % 2 == 0, 1.0, -1.0) / antipode
    return energies


def gap_scaling_exponent(alpha: float) -> float:
    """Finite-size scaling exponent of the clean gap: N**(1-alpha) up to
    alpha = 3, N**-2 beyond."""
    if alpha < 0.0:
        raise TheoryError(f"alpha must be >= 0, got {alpha}")
    return 1.0 - alpha if alpha <= 3.0 else -2.0


def spectral_radius_sum(n: int, alpha: float, gamma: float = 1.0) -> float:
    """Clean periodic band width 4 gamma sum_{m=1}^{N/4} (2m-1)**-alpha.

    The closed form assumes N is a multiple of 4.
    """
    if n < 4 or n % 4 != 0:
        raise TheoryError(f"n must be a positive multiple of 4, got {n}")
    odds = np.arange(1, n // 2, 2, dtype=float)
    return 4.0 * gamma * float(np.sum(odds**-alpha))


def spectral_radius_limit(alpha: float, gamma: float = 1.0) -> float:
    """Large-N band width 4 gamma zeta(alpha) (1 - 2**-alpha), alpha > 1."""
    if not alpha > 1.0:
        raise TheoryError(f"the large-N band width needs alpha > 1, got {alpha}")
    if math.isinf(alpha):
        return 4.0 * gamma
    return 4.0 * gamma * float(zeta(alpha)) * -math.expm1(-alpha * math.log(2.0))


def w_peak(alpha: float, gamma: float = 1.0, n: Optional[int] = None) -> float:
    """Disorder strength matching the band width, sqrt(12) * band width.

    Uses the finite-N sum when n is given (must be a multiple of 4),
    otherwise the large-N limit (alpha > 1 only).
    """
    radius = spectral_radius_sum(n, alpha, gamma) if n is not None else spectral_radius_limit(alpha, gamma)
    return math.sqrt(12.0) * radius


@dataclass(frozen=True)
class ThresholdSet:
    """Every closed-form predictor for one parameter set.

    Entries that fall outside a formula's validity domain are None.
    All values are in units of gamma except xi (sites).
    """

    omega_alpha: Optional[float] = None
    w1_alpha: Optional[float] = None
    c_alpha: Optional[float] = None
    w_gap_alpha: Optional[float] = None
    gamma_cr: Optional[float] = None
    delta_e_sum: Optional[float] = None
    delta_e_limit: Optional[float] = None
    w_peak: Optional[float] = None
    w1_zero: Optional[float] = None
    w2_zero: Optional[float] = None
    w_gap_zero: Optional[float] = None
    xi: Optional[float] = None

    def as_dict(self) -> dict[str, Optional[float]]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


#: alpha above which the gap-equation family is not a meaningful predictor
C_FAMILY_ALPHA_MAX = 2.0


def predict_thresholds(params: ChainParams, w_for_gamma_cr: float = 1.0) -> ThresholdSet:
    """Fill a ThresholdSet for one chain, gating each formula by its
    validity domain instead of extrapolating outside it.

    The localization length uses the explicit nearest-neighbor hopping
    when present, otherwise the effective power-law one.
    """
    n, alpha, gamma = params.n_sites, params.alpha, params.gamma
    values: dict[str, Optional[float]] = {}
    values["omega_alpha"] = effective_hopping(alpha, gamma)
    values["w1_alpha"] = w1_alpha(n, alpha, gamma) if n >= 2 else None

    c_family = n >= 4 and alpha < C_FAMILY_ALPHA_MAX
    values["c_alpha"] = c_alpha(n, alpha) if c_family else None
    values["w_gap_alpha"] = w_gap_alpha(n, alpha, gamma) if c_family else None
    values["gamma_cr"] = (
        gamma_critical(w_for_gamma_cr, n, alpha) if c_family and w_for_gamma_cr > 0.0 else None
    )

    values["delta_e_sum"] = spectral_radius_sum(n, alpha, gamma) if n % 4 == 0 else None
    values["delta_e_limit"] = spectral_radius_limit(alpha, gamma) if alpha > 1.0 else None
    if alpha > 1.0:
        values["w_peak"] = w_peak(alpha, gamma, n if n % 4 == 0 else None)
    else:
        values["w_peak"] = None

    all_to_all = alpha == 0.0
    values["w1_zero"] = w1_zero(n, params.omega_nn) if all_to_all and params.omega_nn > 0 else None
    values["w2_zero"] = w2_zero(n, params.omega_nn) if all_to_all and params.omega_nn > 0 else None
    values["w_gap_zero"] = w_gap_zero(n, gamma) if all_to_all and n >= 2 else None

    hop = params.omega_nn if params.omega_nn > 0.0 else values["omega_alpha"]
    values["xi"] = (
        localization_length(hop, w_for_gamma_cr) if w_for_gamma_cr > 0.0 and hop > 0.0 else None
    )
    return ThresholdSet(**values)
