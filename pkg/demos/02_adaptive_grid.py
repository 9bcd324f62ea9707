"""Element sizing from the local de Broglie wavelength.

Splits the Morse benchmark domain with the implicit phase equation and
shows how element sizes track the local classical momentum: tiny in the
deep well, growing toward the asymptote, and held constant across the
classically forbidden inner wall.
"""

from semdyn import MappingSpec, decompose, phase_integral
from semdyn.presets import MORSE_BENCHMARK

V = MORSE_BENCHMARK
spec = MappingSpec(0.0, 300.0, beta=0.5, e_asy=0.0)

total = phase_integral(V, 0.0, 300.0, 0.0)
print(f"total phase content of [0, 300] at E_asy = 0: {total:.1f}")
print(f"(about {total:.0f} half-de-Broglie-wavelengths; the Morse curve"
      f" holds {V.n_levels} bound levels)")

dec = decompose(V, spec)
sizes = dec.element_sizes()
mids = 0.5 * (dec.breakpoints[:-1] + dec.breakpoints[1:])
print(f"\nbeta = {spec.beta}: {dec.n_elements} elements")
for r_lo, r_hi in ((0.0, 6.0), (6.0, 7.0), (19.0, 21.0), (80.0, 90.0),
                   (250.0, 300.0)):
    m = (mids >= r_lo) & (mids < r_hi)
    if m.any():
        print(f"  elements near r in [{r_lo:5.1f}, {r_hi:5.1f}): "
              f"size {sizes[m].min():.3f} .. {sizes[m].max():.3f} bohr")

# halving beta doubles the density where the phase equation rules
dec2 = decompose(V, MappingSpec(0.0, 300.0, beta=0.25, e_asy=0.0))
print(f"\nbeta = 0.25: {dec2.n_elements} elements "
      f"(~2x {dec.n_elements})")

# each interior element carries its phase budget
k = dec.n_elements // 2
ph = phase_integral(V, dec.breakpoints[k], dec.breakpoints[k + 1], 0.0)
print(f"phase across element {k}: {ph:.6f} (budget {spec.beta})")
