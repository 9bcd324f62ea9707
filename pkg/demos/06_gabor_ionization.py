"""When are the high harmonics emitted?

Gabor time-frequency profile of the dipole acceleration for the
(phi0 + phi1)/sqrt(2) start, compared with the ionization probability:
emission bursts ride the oscillations of the ionization, the three-step
recollision picture at work.
"""

from pathlib import Path

import numpy as np

from semdyn import dipole_acceleration, gabor_profile, \
    ionization_probability
from semdyn.hhg import write_gabor_csv
from semdyn.presets import hhg_bounds, hhg_setup, paper_propagation, \
    paper_pulse
from semdyn.propagator import WavefunctionState, propagate

out_dir = Path(__file__).resolve().parent
H, V, basis = hhg_setup(n_states=45)
dv = V.derivative(H.r)
bound = basis.vectors[:, basis.values < 0]
print(f"{bound.shape[1]} bound states below threshold on this box")

pulse = paper_pulse()
config = paper_propagation(sample_stride=4)
psi0 = (basis.vectors[:, 0] + basis.vectors[:, 1]) / np.sqrt(2.0)
traj = propagate(
    H, pulse, WavefunctionState(psi0.astype(complex)), config,
    hhg_bounds(H, pulse),
    observers={
        "ddot": lambda psi, t: dipole_acceleration(psi, dv),
        "p_ion": lambda psi, t: ionization_probability(psi, bound),
    },
)
dd = traj.observables["ddot"]
p_ion = traj.observables["p_ion"]
dt = traj.times[1] - traj.times[0]
print(f"final ionization probability: {p_ion[-1]:.4f}")

wc = 10.1 * pulse.omega0
sigma = (2.0 * np.pi / pulse.omega0) / 3.0
gab = gabor_profile(dd, dt, sigma, (wc, 3.0 * wc))
write_gabor_csv(out_dir / "gabor.csv", gab)

# emission happens while the ionization is changing fast
profile = gab.profile / gab.profile.max()
dion = np.abs(np.gradient(p_ion, traj.times))
dion_on_gabor_t = np.interp(gab.times, traj.times, dion / dion.max())
heavy = profile > 0.25
print(f"emission window: t in [{gab.times[heavy].min():.0f}, "
      f"{gab.times[heavy].max():.0f}] a.u. "
      f"(pulse center {pulse.center:.0f})")
corr = np.corrcoef(profile, dion_on_gabor_t)[0, 1]
print(f"correlation of Gabor profile with |d P_ion/dt|: {corr:.2f}")
print(f"wrote {out_dir / 'gabor.csv'}")
