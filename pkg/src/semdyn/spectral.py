"""Eigensolvers and spectral-interval bounds for the sparse Hamiltonian."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

__all__ = [
    "EigenResult",
    "SpectralBounds",
    "eigs",
    "denormalize",
    "spectral_bounds",
    "write_eigenvalue_csv",
]

# dense symmetric solves stay competitive up to a few thousand points
_DENSE_DIM_MAX = 3000
_RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenResult:
    """Converged eigenpairs in the mass-weighted (tilde) convention."""

    values: np.ndarray        # ascending (hartree)
    vectors: np.ndarray       # column j pairs with values[j]
    residuals: np.ndarray     # ||H u - lambda u|| / ||u||
    backend: str

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SpectralBounds:
    """Certified interval [e_lo, e_hi] around the numerical spectrum."""

    e_lo: float
    e_hi: float
    method: str
    safety: float
    dipole_extent: float

    @property
    def width(self):
        return self.e_hi - self.e_lo


def _fix_signs(vectors):
    # deterministic orientation: first component above threshold positive
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.nonzero(np.abs(col) > 1e-8 * np.max(np.abs(col)))[0]
        if len(nz) and col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def eigs(H, count, target="lowest", backend="auto", maxiter=None):
    """Eigenpairs of a SparseHamiltonian.

    target : "lowest" | "highest" | (lo, hi) energy window
    backend : "auto" (dense below 3000, Lanczos above), "dense", "lanczos"

    The Lanczos path uses ARPACK in shift-invert mode for low states,
    which converges orders of magnitude faster than plain iteration when
    the kinetic scale dwarfs level spacings.
    """
    dim = H.dim
    if isinstance(target, str) and count > dim:
        raise ValueError(f"requested {count} eigenpairs of a {dim}-dim operator")
    if backend == "auto":
        backend = "dense" if dim <= _DENSE_DIM_MAX else "lanczos"

    if backend == "dense":
        vals, vecs = sla.eigh(H.dense())
    elif backend == "lanczos":
        k = min(count, dim - 2)
        if isinstance(target, tuple):
            sigma = 0.5 * (target[0] + target[1])
            vals, vecs = spla.eigsh(
                H.matrix, k=k, sigma=sigma, which="LM", maxiter=maxiter
            )
        elif target == "lowest":
            sigma = float(np.min(H.v)) - max(1.0, 0.05 * abs(np.min(H.v)))
            vals, vecs = spla.eigsh(
                H.matrix, k=k, sigma=sigma, which="LM", maxiter=maxiter
            )
        elif target == "highest":
            vals, vecs = spla.eigsh(
                H.matrix, k=k, which="LA", maxiter=maxiter
            )
        else:
            raise ValueError(f"unknown target {target!r}")
    else:
        raise ValueError(f"unknown backend {backend!r}")

    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if isinstance(target, tuple):
        keep = (vals >= target[0]) & (vals <= target[1])
        vals, vecs = vals[keep], vecs[:, keep]
    elif target == "highest":
        vals, vecs = vals[-count:], vecs[:, -count:]
    else:
        vals, vecs = vals[:count], vecs[:, :count]
    vecs = _fix_signs(np.ascontiguousarray(vecs))
    res = np.array(
        [
            np.linalg.norm(H.apply(vecs[:, j]) - vals[j] * vecs[:, j])
            / np.linalg.norm(vecs[:, j])
            for j in range(vecs.shape[1])
        ]
    )
    scale = max(1.0, np.max(np.abs(vals))) if len(vals) else 1.0
    if len(res) and np.max(res) > _RESIDUAL_TOL * max(scale, np.max(np.abs(H.v)) + 1):
        raise SolverError(
            f"eigensolver residual {np.max(res):.2e} above tolerance"
        )
    return EigenResult(vals, vecs, res, backend)


def denormalize(u_tilde, gamma):
    """Undo the mass weighting: u = u_tilde / sqrt(gamma), pointwise."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0):
        raise ValueError("gamma must be positive")
    return np.asarray(u_tilde) / np.sqrt(gamma)


def spectral_bounds(H, dipole_extent=0.0, safety=0.05):
    """Interval certified to enclose the spectrum of H -/+ diag(r E(t)).

    e_hi comes from a Lanczos estimate of the top of the field-free
    spectrum, e_lo from min(V); the interval is widened by ``safety``
    times the span on both sides, and by ``dipole_extent`` (max |E| times
    max |r|) to cover the driven diagonal for every field value.
    """
    if dipole_extent < 0:
        raise ValueError("dipole_extent must be >= 0")
    if H.dim > 2:
        lam_max = float(
            spla.eigsh(H.matrix, k=1, which="LA", return_eigenvectors=False,
                       tol=1e-8)[0]
        )
        method = "lanczos-estimate"
    else:
        lam_max = float(np.max(sla.eigvalsh(H.dense())))
        method = "exact-extremal"
    lam_lo = float(np.min(H.v))
    span = lam_max - lam_lo
    margin = safety * span
    return SpectralBounds(
        e_lo=lam_lo - margin - dipole_extent,
        e_hi=lam_max + margin + dipole_extent,
        method=method,
        safety=safety,
        dipole_extent=dipole_extent,
    )


def write_eigenvalue_csv(path, result):
    """CSV export: index, energy_hartree, residual."""
    with open(path, "w") as fh:
        fh.write("index,energy_hartree,residual\n")
        for i, (e, r) in enumerate(zip(result.values, result.residuals)):
            fh.write(f"{i},{float(e)!r},{float(r)!r}\n")
