"""Assembly of the global sparse renormalized Hamiltonian.

Each element contributes a dense (N+1)^2 block of the weak-form bilinear
form; blocks overlap only in the single shared corner entry at element
interfaces, where the two contributions add.  Dividing by sqrt(gamma_i
gamma_j) turns the generalized eigenproblem into a standard symmetric one,
and deleting the first and last row/column enforces Dirichlet conditions.
The result is block-banded with half-bandwidth N.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .gll import stiffness_matrix
from .mapping import DomainDecomposition, GlobalGrid, build_grid

__all__ = [
    "ElementBlock",
    "SparseHamiltonian",
    "elemental_block",
    "assemble",
    "nnz_count",
    "fd_hamiltonian",
    "export_coo",
]

HBAR = 1.0  # atomic units


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class ElementBlock:
    """Dense weak-form block a^k(v_i, v_j) of a single element."""

    index: int
    values: np.ndarray  # (N+1, N+1), symmetric


def elemental_block(k, grid, rule, V, mu, stiffness=None):
    """Weak-form block of element k.

    block = (hbar^2 / 2 mu) J_k^{-1} S + diag(V(r_j) w^k_j).

    The normal-derivative surface terms of the weak form are never
    materialized: they cancel pairwise at interfaces when blocks are
    summed, and the Dirichlet row/column deletion removes them at the
    outer edges.
    """
    if stiffness is None:
        stiffness = stiffness_matrix(rule)
    N = rule.order
    jac = grid.decomposition.jacobians[k]
    sl = slice(k * N, k * N + N + 1)
    r_local = grid.points[sl]
    w_local = grid.element_weights[k]
    block = (HBAR**2 / (2.0 * mu)) / jac * stiffness + np.diag(
        np.asarray(V(r_local), dtype=float) * w_local
    )
    return ElementBlock(k, block)


@dataclass
class SparseHamiltonian:
    """Dirichlet-reduced renormalized Hamiltonian and its grid data.

    matrix : CSR of the interior operator, dimension N*M - 1
    r : interior collocation points (bohr)
    v : potential at the interior points (hartree)
    gamma : merged interior weights (bohr)
    """

    order: int
    n_elements: int
    matrix: sp.csr_matrix = field(repr=False)
    r: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    mu: float = 1.0
    boundary: str = "dirichlet"
    _complex: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply(self, psi):
        """Matrix-vector (or matrix-block) product with the operator."""
        psi = np.asarray(psi)
        if psi.shape[0] != self.dim:
            raise ValueError(
                f"state length {psi.shape[0]} != operator dimension {self.dim}"
            )
        if np.iscomplexobj(psi):
            if self._complex is None:
                self._complex = self.matrix.astype(np.complex128).tocsr()
            return self._complex @ psi
        return self.matrix @ psi

    def band_storage(self):
        """Upper-triangle band array, LAPACK layout (N+1, dim).

        ab[N + i - j, j] = A[i, j] for max(0, j-N) <= i <= j.
        """
        N = self.order
        ab = np.zeros((N + 1, self.dim))
        coo = sp.triu(self.matrix).tocoo()
        ab[N + coo.row - coo.col, coo.col] = coo.data
        return ab

    def stored_entry_count(self):
        """Number of band slots actually stored (upper triangle, banded)."""
        N = self.order
        n = self.dim
        if n <= 0:
            return 0
        return n * (N + 1) - N * (N + 1) // 2

    def dense(self):
        return self.matrix.toarray()


def nnz_count(N, M):
    """Stored entries of the band-exploiting upper-triangle layout.

    (N M + 1)(N + 1) - N(N + 1)/2 - 2(N + 1); negative values (possible
    only for the degenerate N = M = 1 case) clamp to zero.
    """
    if N < 1 or M < 1:
        raise ValueError("need N >= 1 and M >= 1")
    count = (N * M + 1) * (N + 1) - N * (N + 1) // 2 - 2 * (N + 1)
    return max(count, 0)


def assemble(source, rule, V, mu=1.0):
    """Assemble the renormalized Dirichlet Hamiltonian.

    Parameters
    ----------
    source : GlobalGrid or DomainDecomposition
    rule : GllRule (its order must match the grid when a grid is given)
    V : callable, potential in hartree
    mu : mass in a.u.
    """
    if isinstance(source, DomainDecomposition):
        grid = build_grid(source, rule)
    elif isinstance(source, GlobalGrid):
        grid = source
        if grid.order != rule.order:
            raise AssemblyError(
                f"grid was built for order {grid.order}, rule has "
                f"{rule.order}"
            )
    else:
        raise TypeError("assemble expects a GlobalGrid or DomainDecomposition")
    N = rule.order
    M = grid.decomposition.n_elements
    if N * M - 1 < 1:
        raise AssemblyError(
            "no interior collocation points under Dirichlet conditions "
            f"(N={N}, M={M})"
        )
    S = stiffness_matrix(rule)
    npts = grid.npoints
    kin = (HBAR**2 / (2.0 * mu)) / grid.decomposition.jacobians
    v_all = np.asarray(V(grid.points), dtype=float)

    nper = (N + 1) ** 2
    rows = np.empty(M * nper, dtype=np.int64)
    cols = np.empty(M * nper, dtype=np.int64)
    vals = np.empty(M * nper)
    local = np.arange(N + 1)
    rr = np.repeat(local, N + 1)
    cc = np.tile(local, N + 1)
    for k in range(M):
        sl = slice(k * N, k * N + N + 1)
        block = kin[k] * S + np.diag(v_all[sl] * grid.element_weights[k])
        rows[k * nper : (k + 1) * nper] = k * N + rr
        cols[k * nper : (k + 1) * nper] = k * N + cc
        vals[k * nper : (k + 1) * nper] = block.ravel()
    A = sp.coo_matrix((vals, (rows, cols)), shape=(npts, npts)).tocsr()
    scale = sp.diags(1.0 / np.sqrt(grid.gamma))
    A_tilde = (scale @ A @ scale).tocsr()
    H = A_tilde[1:-1, 1:-1].tocsr()
    H.sum_duplicates()
    return SparseHamiltonian(
        order=N,
        n_elements=M,
        matrix=H,
        r=grid.points[1:-1].copy(),
        v=v_all[1:-1].copy(),
        gamma=grid.gamma[1:-1].copy(),
        mu=mu,
    )


def fd_hamiltonian(order, points, V, mu=1.0):
    """Finite-difference reference Hamiltonian on a uniform grid.

    ``points`` are the full grid including both walls; Dirichlet values
    are dropped, so the operator acts on points[1:-1].  Beyond-wall
    samples are treated as zero (consistent with u = 0 outside).
    """
    points = np.asarray(points, dtype=float)
    h = np.diff(points)
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise ValueError("finite differences need a uniform grid")
    h = h[0]
    r = points[1:-1]
    n = len(r)
    t = HBAR**2 / (2.0 * mu * h**2)
    if order == 2:
        diags = [np.full(n, 2.0 * t), np.full(n - 1, -t)]
        H = sp.diags([diags[1], diags[0], diags[1]], [-1, 0, 1])
    elif order == 4:
        c0, c1, c2 = 30.0 / 12.0, -16.0 / 12.0, 1.0 / 12.0
        diag = np.full(n, c0 * t)
        # antisymmetric ghost across the Dirichlet wall: u(-h) = -u(h)
        diag[0] -= c2 * t
        diag[-1] -= c2 * t
        H = sp.diags(
            [
                np.full(n - 2, c2 * t),
                np.full(n - 1, c1 * t),
                diag,
                np.full(n - 1, c1 * t),
                np.full(n - 2, c2 * t),
            ],
            [-2, -1, 0, 1, 2],
        )
    else:
        raise ValueError("finite-difference order must be 2 or 4")
    H = (H + sp.diags(np.asarray(V(r), dtype=float))).tocsr()
    return SparseHamiltonian(
        order=order // 2,
        n_elements=n,
        matrix=H,
        r=r.copy(),
        v=np.asarray(V(r), dtype=float),
        gamma=np.full(n, h),
        mu=mu,
    )


def export_coo(H, path):
    """Write the operator in coordinate text format for debugging.

    One-line header: N, M, dimension; then "row col value" triplets of
    the stored upper triangle.
    """
    coo = sp.triu(H.matrix).tocoo()
    with open(path, "w") as fh:
        fh.write(f"# N={H.order} M={H.n_elements} dim={H.dim}\n")
        for i, j, x in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {float(x)!r}\n")
