"""semdyn: adaptive multi-domain spectral-element 1-D quantum dynamics.

Sparse Gauss-Lobatto-Legendre collocation Hamiltonians on elements sized
by the local de Broglie wavelength, Chebyshev wavepacket propagation, and
the high-harmonic-generation toolchain built on top of them.
"""

__version__ = "0.1.0"

from .gll import (
    GllRule,
    cardinal_diff_matrix,
    gll_rule,
    legendre_eval,
    stiffness_matrix,
)
from .hamiltonian import (
    SparseHamiltonian,
    assemble,
    elemental_block,
    fd_hamiltonian,
    nnz_count,
)
from .hhg import (
    CrossDipoleModel,
    SpectrumConfig,
    SuperpositionSpec,
    dipole_acceleration,
    estimate_cutoff,
    field_free_acceleration,
    gabor_profile,
    harmonic_spectrum,
    ionization_probability,
    spa_optimize,
    superposition_state,
    yield_functional,
)
from .mapping import (
    DomainDecomposition,
    GlobalGrid,
    MappingSpec,
    build_grid,
    calibrate_beta,
    decompose,
    graded_breakpoints,
    next_breakpoint,
    phase_integral,
)
from .potentials import Morse, ParticleInBox, SoftCoulomb, TabulatedPotential
from .propagator import (
    PropagationConfig,
    PulseSpec,
    WavefunctionState,
    chebyshev_coeffs,
    field_value,
    propagate,
    propagate_basis,
    step,
)
from .spectral import EigenResult, SpectralBounds, denormalize, eigs, spectral_bounds
