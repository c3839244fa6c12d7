"""Disorder-enhanced transport in 1D chains with power-law hopping.

Library for steady-state excitation currents through disordered chains
computed from the biorthogonal eigenbasis of a non-Hermitian effective
Hamiltonian, validated against master-equation and time-propagation
oracles, plus every closed-form threshold of the transport regimes.
"""

__version__ = "0.1.0"

from .model import (
    ChainParams,
    DisorderRealization,
    ModelError,
    build_clean_periodic,
    build_effective_hamiltonian,
    build_hamiltonian,
    sample_disorder,
)
from .spectral import (
    BiorthogonalSpectrum,
    DegeneracyError,
    RealSpectrum,
    SpectralError,
    eig_biorthogonal,
    eig_hermitian,
    energy_gap,
    spectral_radius,
)
from .config import ConfigError, SweepConfig, load_config, log_grid
from .diagnostics import (
    DiagnosticsError,
    StateProfile,
    most_conducting_state,
    participation_ratio,
    pr_collapse_curve,
)
from .harness import (
    DetWindow,
    HarnessError,
    PeakFit,
    PeakFitError,
    SweepResult,
    SweepRow,
    detect_det_window,
    fit_peak,
    rescale_curves,
    run_sweep,
)
from .theory import TheoryError, ThresholdSet, predict_thresholds
from .transport import (
    LindbladResult,
    PropagationError,
    TransportError,
    TransportResult,
    TypicalCurrent,
    lindblad_steady_current,
    steady_current,
    transfer_time_diag,
    transfer_time_full,
    transfer_time_max,
    transfer_time_propagation,
    typical_current,
)

__all__ = [name for name in dir() if not name.startswith("_")]
