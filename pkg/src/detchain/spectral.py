"""Eigendecompositions: Hermitian and biorthogonal (complex symmetric).

The effective Hamiltonian is complex symmetric, so its left eigenvectors
are the plain (unconjugated) transposes of the right ones once the
columns are normalized by the bilinear form r.T @ r = 1.  Near exact
degeneracies that normalization breaks down and the left vectors are
obtained by inverting the right-eigenvector matrix instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: columns with |r.T @ r| below this are treated as numerically self-orthogonal
SELF_ORTHOGONALITY_FLOOR = 1e-10

#: biorthogonality residual beyond which the matrix is reported as defective
BIORTHOGONALITY_TOL = 1e-8

#: eigenvalue pairs closer than this (times the matrix scale) are flagged
DEGENERACY_TOL = 1e-12


class SpectralError(RuntimeError):
    """Eigendecomposition failed or input violates the contract."""


class DegeneracyError(SpectralError):
    """Near-defective matrix: biorthogonality cannot be established.

    Carries the closest eigenvalue pair for diagnosis.
    """

    def __init__(self, message: str, pair: tuple[complex, complex]):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True, eq=False)
class RealSpectrum:
    """Sorted spectrum of a real symmetric matrix.

    eigenvalues: ascending; eigenvectors: orthonormal columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True, eq=False)
class BiorthogonalSpectrum:
    """Eigensystem of a complex symmetric (non-Hermitian) matrix.

    ``right_vectors[:, k]`` is |r_k>, ``left_vectors[k, :]`` is <l_k|,
    with <l_k|r_k'> = delta(k, k').  ``widths[k] = -Im eigenvalue[k]``
    is the decay rate of state k into the drain.  Eigenvalues are sorted
    by real part (ties by imaginary part).
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    widths: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()
    left_from_inverse: bool = False

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _check_symmetric(m: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.abs(m).max()))
    asym = float(np.abs(m - m.T).max())
    if asym > 1e-12 * scale:
        raise SpectralError(f"{what} must be symmetric; max |m - m.T| = {asym:.3e}")


def eig_hermitian(h: np.ndarray) -> RealSpectrum:
    """Full sorted spectrum of a real symmetric matrix."""
    h = np.asarray(h, dtype=float)
    _check_symmetric(h, "eig_hermitian input")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(
            f"symmetric eigensolver failed: {exc} "
            f"(n={h.shape[0]}, fro_norm={np.linalg.norm(h):.6e})"
        ) from exc
    return RealSpectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def energy_gap(spec: RealSpectrum) -> float:
    """Gap E2 - E1 between the two lowest levels."""
    if spec.n < 2:
        raise SpectralError("energy gap needs at least two levels")
    return float(spec.eigenvalues[1] - spec.eigenvalues[0])


def spectral_radius(spec: RealSpectrum) -> float:
    """Width of the spectrum, E_max - E_min (0 for a single level)."""
    if spec.n == 0:
        raise SpectralError("empty spectrum")
    return float(spec.eigenvalues[-1] - spec.eigenvalues[0])


def _canonical_phase(vectors: np.ndarray) -> np.ndarray:
    """Fix the residual sign freedom column by column (largest entry
    gets a positive real part)."""
    pivot = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[pivot, np.arange(vectors.shape[1])]
    flip = (lead.real < 0.0) | ((lead.real == 0.0) & (lead.imag < 0.0))
    vectors[:, flip] = -vectors[:, flip]
    return vectors


def eig_biorthogonal(h_eff: np.ndarray) -> BiorthogonalSpectrum:
    """Biorthogonal eigensystem of a complex symmetric matrix.

    Raises DegeneracyError if mutually biorthogonal left/right pairs
    cannot be formed to within BIORTHOGONALITY_TOL (defective or
    near-defective input).
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    _check_symmetric(h_eff, "eig_biorthogonal input")
    n = h_eff.shape[0]
    scale = max(1.0, float(np.abs(h_eff).max()))

    try:
        eigenvalues, right = np.linalg.eig(h_eff)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(
            f"eigensolver failed: {exc} (n={n}, fro_norm={np.linalg.norm(h_eff):.6e})"
        ) from exc

    # Passivity: true eigenvalues have Im <= 0; clip eigensolver round-off.
    im_max = float(eigenvalues.imag.max())
    if im_max > 1e-10 * scale:
        raise SpectralError(
            f"eigenvalue with positive imaginary part {im_max:.3e}; input is not passive"
        )
    eigenvalues = np.where(eigenvalues.imag > 0.0, eigenvalues.real + 0.0j, eigenvalues)

    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    right = right[:, order]

    # Bilinear normalization r.T @ r = 1 where the form is not degenerate.
    bilinear = np.sum(right * right, axis=0)
    safe = np.abs(bilinear) >= SELF_ORTHOGONALITY_FLOOR
    right[:, safe] /= np.sqrt(bilinear[safe])
    right = _canonical_phase(right)

    gaps = np.abs(np.diff(eigenvalues))
    degenerate = tuple(
        (int(i), int(i + 1)) for i in np.nonzero(gaps < DEGENERACY_TOL * scale)[0]
    )

    left = right.T
    residual = float(np.abs(left @ right - np.eye(n)).max()) if n > 0 else 0.0
    from_inverse = False
    if residual > 1e-10 or not np.all(safe):
        try:
            left = np.linalg.inv(right)
        except np.linalg.LinAlgError as exc:
            i, j = _closest_pair(eigenvalues)
            raise DegeneracyError(
                f"right eigenvector matrix is singular: {exc}",
                (complex(eigenvalues[i]), complex(eigenvalues[j])),
            ) from exc
        from_inverse = True
        residual = float(np.abs(left @ right - np.eye(n)).max())
        if residual > BIORTHOGONALITY_TOL:
            i, j = _closest_pair(eigenvalues)
            raise DegeneracyError(
                f"biorthogonality residual {residual:.3e} exceeds "
                f"{BIORTHOGONALITY_TOL:.1e}; closest eigenvalue pair "
                f"({eigenvalues[i]:.6e}, {eigenvalues[j]:.6e})",
                (complex(eigenvalues[i]), complex(eigenvalues[j])),
            )

    return BiorthogonalSpectrum(
        eigenvalues=eigenvalues,
        right_vectors=right,
        left_vectors=left,
        widths=-eigenvalues.imag,
        degenerate_pairs=degenerate,
        left_from_inverse=from_inverse,
    )


def _closest_pair(eigenvalues: np.ndarray) -> tuple[int, int]:
    if eigenvalues.shape[0] < 2:
        return 0, 0
    gaps = np.abs(np.diff(eigenvalues))
    i = int(np.argmin(gaps))
    return i, i + 1
