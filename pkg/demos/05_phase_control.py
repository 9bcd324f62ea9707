"""Initial-state control of the harmonic yield.

One lockstep propagation of the lowest eigenstates prices the whole
study: the cross dipole-acceleration record makes J(theta) for every
relative phase, the field-sign symmetry check, and the sequential
coefficient optimization essentially free afterwards.
"""

from pathlib import Path

import numpy as np

from semdyn.hhg import (
    CrossDipoleModel,
    SpaConfig,
    SpectrumConfig,
    spa_optimize,
    write_scan_csv,
)
from semdyn.presets import hhg_bounds, hhg_setup, paper_propagation, \
    paper_pulse
from semdyn.propagator import propagate_basis

out_dir = Path(__file__).resolve().parent
WC = 10.1 * 0.1  # ground-state cutoff frequency anchoring the yield band

H, V, basis = hhg_setup(n_states=4)
dv = V.derivative(H.r)
config = paper_propagation()

ensembles = {}
for sign in (+1.0, -1.0):
    pulse = paper_pulse(sign=sign)
    ensembles[sign] = propagate_basis(
        H, pulse, [basis.vectors[:, j] for j in range(4)], config,
        hhg_bounds(H, pulse), dv,
    )
    print(f"propagated 4-state ensemble, sign {sign:+.0f}")

# the paper's control observables respond to the unwindowed spectrum:
# the persistent two-state beat contributes its truncation pedestal
analysis = SpectrumConfig(window="none")
models = {s: CrossDipoleModel(e, analysis) for s, e in ensembles.items()}

thetas = np.linspace(0.0, 2.0 * np.pi, 65)


def scan(model, partner):
    return model.phase_scan(thetas, WC, partner=partner)


J0 = models[+1].yield_value(np.eye(4)[0], WC)
for partner, tag in ((1, "phi0-phi1"), (2, "phi0-phi2")):
    Jp, d0p = scan(models[+1], partner)
    Jm, d0m = scan(models[-1], partner)
    write_scan_csv(out_dir / f"scan_{tag}.csv", "theta", thetas, Jp, d0p)
    print(f"\n{tag}: J range {Jp.min():.2e} .. {Jp.max():.2e} "
          f"({Jp.max() / Jp.min():.1f}x over theta), J(phi0) = {J0:.2e}")
    if partner == 1:
        print(f"  maxima near theta = 0 and pi: J(0) = {Jp[0]:.2e}, "
              f"J(pi) = {Jp[32]:.2e}")
        print(f"  sign flip: J(pi, -E)/J(0, +E) = {Jm[32] / Jp[0]:.6f}")
    else:
        dev = np.max(np.abs(Jp - Jm) / Jp)
        print(f"  same parity: max |J(+E) - J(-E)|/J = {dev:.2e}")

# sequential optimization over four states
model = models[+1]
cfg = SpaConfig(basis_limit=4, start_active=2, line_tol=2e-3)
coeffs, history = spa_optimize(
    lambda c: model.yield_value(c, WC), 4, cfg
)
print(f"\nSPA over 4 states: J {history[0]:.3e} -> {history[-1]:.3e} "
      f"(+{100 * (history[-1] / history[0] - 1):.1f}%)")
print(f"optimal moduli: {np.round(np.abs(coeffs), 4)}")
