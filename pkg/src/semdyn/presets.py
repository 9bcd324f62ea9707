"""Ready-made configurations for the studies shipped with the package."""

import numpy as np

from .gll import gll_rule
from .hamiltonian import assemble
from .mapping import MappingSpec, decompose, graded_breakpoints
from .potentials import Morse, SoftCoulomb
from .propagator import PropagationConfig, PulseSpec
from .spectral import eigs, spectral_bounds

__all__ = [
    "morse_benchmark",
    "soft_coulomb_spectrum_setup",
    "hhg_setup",
    "paper_pulse",
    "paper_propagation",
]

# Morse curve fitted to the quoted benchmark levels
# E_100 = -112.1253125, E_300 = -12.3753125 (omega = 1, anharmonicity 1/800)
MORSE_BENCHMARK = Morse(depth=200.0, a=0.05, r_e=20.0, mu=1.0)
MORSE_DOMAIN = (0.0, 300.0)

SOFT_COULOMB = SoftCoulomb(a=2.0)

# pulse of the harmonic-generation study
PULSE_E0 = 0.06
PULSE_OMEGA0 = 0.1
PULSE_FWHM = 206.5
PULSE_DURATION = 4.0 * PULSE_FWHM
PULSE_CENTER = PULSE_DURATION / 2.0


def morse_benchmark(order=3, n_points=4000, potential=None, domain=None):
    """Mapped-grid Hamiltonian for the Morse eigenvalue benchmark.

    Calibrates beta so that order * M + 1 is as close as possible to
    ``n_points`` with E_asy = 0 (the dissociation threshold).
    Returns (H, potential, beta, decomposition).
    """
    from .mapping import calibrate_beta

    V = potential or MORSE_BENCHMARK
    lo, hi = domain or MORSE_DOMAIN
    target_m = max(2, round((n_points - 1) / order))
    spec = MappingSpec(lo, hi, beta=0.5, e_asy=0.0, mu=V.mu)
    beta, dec = calibrate_beta(V, spec, target_m)
    H = assemble(dec, gll_rule(order), V, mu=V.mu)
    return H, V, beta, dec


def soft_coulomb_spectrum_setup(order=3, beta=0.45, e_asy=0.05,
                                r_max=8000.0):
    """Mapped grid for the soft-Coulomb bound-state check on [-r_max, r_max]."""
    V = SOFT_COULOMB
    spec = MappingSpec(-r_max, r_max, beta=beta, e_asy=e_asy)
    dec = decompose(V, spec)
    H = assemble(dec, gll_rule(order), V)
    return H, V, dec


def hhg_setup(order=3, r_max=500.0, core_half_width=60.0, core_size=1.25,
              outer_size=4.0, n_states=8):
    """Grid, operator, and eigenbasis for the driven soft-Coulomb runs.

    The graded layout keeps the recollision region (|x| < 60 bohr) fine
    enough to represent return energies of several hartree while the
    outer region only needs to carry the slow ionized tail.  Returns
    (H, V, eigenresult) with the lowest ``n_states`` field-free states.
    """
    V = SOFT_COULOMB
    dec = graded_breakpoints(r_max, core_half_width, core_size, outer_size)
    H = assemble(dec, gll_rule(order), V)
    basis = eigs(H, n_states, target="lowest",
                 backend="lanczos" if H.dim > 3000 else "auto")
    return H, V, basis


def paper_pulse(e0=PULSE_E0, sign=1.0, time_shift=0.0):
    return PulseSpec(
        e0=e0,
        omega0=PULSE_OMEGA0,
        fwhm=PULSE_FWHM,
        center=PULSE_CENTER,
        sign=sign,
        time_shift=time_shift,
    )


def paper_propagation(dt=0.05, duration=PULSE_DURATION, **kw):
    return PropagationConfig(dt=dt, duration=duration, **kw)


def hhg_bounds(H, pulse, extra_duration=0.0):
    """Spectral bounds inflated by the pulse's dipole reach."""
    extent = pulse.e0 * float(np.max(np.abs(H.r)))
    return spectral_bounds(H, dipole_extent=extent)
