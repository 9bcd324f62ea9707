"""Potential-energy curves used by the engine (atomic units throughout)."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "SoftCoulomb",
    "Morse",
    "ParticleInBox",
    "TabulatedPotential",
]


@dataclass(frozen=True)
class SoftCoulomb:
    """V(x) = -1 / sqrt(a + x^2); a = 2 puts the ground state at -0.5."""

    a: float = 2.0

    def __call__(self, x):
        return -1.0 / np.sqrt(self.a + np.asarray(x) ** 2)

    def derivative(self, x):
        x = np.asarray(x)
        return x / (self.a + x**2) ** 1.5


@dataclass(frozen=True)
class Morse:
    """V(r) = D (1 - exp(-a (r - r_e)))^2 - D."""

    depth: float
    a: float
    r_e: float
    mu: float = 1.0

    def __call__(self, r):
        u = np.exp(-self.a * (np.asarray(r) - self.r_e))
        return self.depth * (1.0 - u) ** 2 - self.depth

    def derivative(self, r):
        u = np.exp(-self.a * (np.asarray(r) - self.r_e))
        return 2.0 * self.depth * self.a * (1.0 - u) * u

    @property
    def omega(self):
        return self.a * np.sqrt(2.0 * self.depth / self.mu)

    def level(self, n):
        """Analytic bound level E_n = -D + w(n+1/2) - w^2/(4D) (n+1/2)^2."""
        v = np.asarray(n) + 0.5
        w = self.omega
        return -self.depth + w * v - w**2 / (4.0 * self.depth) * v**2

    @property
    def n_levels(self):
        """Number of bound levels below dissociation."""
        return int(np.floor(np.sqrt(2 * self.depth * self.mu) / self.a - 0.5)) + 1


@dataclass(frozen=True)
class ParticleInBox:
    """Zero potential; boundaries supply the confinement."""

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def derivative(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @staticmethod
    def level(n, length, mu=1.0):
        """E_n = n^2 pi^2 / (2 mu L^2) with n = 1, 2, ..."""
        return np.asarray(n) ** 2 * np.pi**2 / (2.0 * mu * length**2)


class TabulatedPotential:
    """Cubic-spline interpolant of a two-column (r, V) table.

    Evaluation outside the tabulated range raises; extrapolating a fitted
    spline silently is how benchmark potentials get corrupted.
    """

    def __init__(self, r, v):
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 4:
            raise ValueError("need matching 1-D arrays with >= 4 samples")
        if np.any(np.diff(r) <= 0):
            raise ValueError("grid column must be strictly increasing")
        self.r_min = float(r[0])
        self.r_max = float(r[-1])
        self._spline = CubicSpline(r, v)
        self._dspline = self._spline.derivative()
        self.interpolation = "cubic-spline"

    @classmethod
    def from_file(cls, path):
        """Load a two-column text file: r (bohr), V (hartree)."""
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError(f"{path}: expected two columns (r, V)")
        return cls(data[:, 0], data[:, 1])

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r_min - 1e-12) or np.any(r > self.r_max + 1e-12):
            raise ValueError(
                "tabulated potential queried outside "
                f"[{self.r_min}, {self.r_max}]"
            )
        return r

    def __call__(self, r):
        return self._spline(self._check(r))

    def derivative(self, r):
        return self._dspline(self._check(r))
