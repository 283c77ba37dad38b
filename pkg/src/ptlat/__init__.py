"""Spectral analysis of non-Hermitian PT-symmetric Aubry-Andre tight-binding chains."""

__version__ = "0.1.0"

from .model import (
    BetaValue,
    ImpurityPlacement,
    IrrationalBeta,
    ModelSpec,
    ModelValidationError,
    RationalBeta,
    Variant,
    build_diagonal_aa,
    build_hamiltonian,
    build_offdiagonal_aa,
    build_with_nnn,
)
from .eig import EigenConvergenceError, Spectrum, charpoly_roots, eigendecompose, eigenvalues
from .analysis import (
    EdgeStateReport,
    MajoranaForm,
    check_pt,
    edge_weight,
    find_zero_modes,
    ipr,
    is_spectrum_real,
    majorana_form,
    max_imag,
)
from .sweep import (
    AllPhi,
    AtFixedPhi,
    CriticalGammaResult,
    SweepResult,
    critical_gamma,
    default_phi_grid,
    localization_scan,
    n_scan,
    phase_diagram,
    sweep_phi,
    transition_phis,
)
