"""Gauss-Lobatto-Legendre quadrature rules and cardinal-function matrices.

Everything here lives on the reference interval [-1, 1].  A rule of order N
has N+1 nodes (the roots of (1 - xi^2) L'_N(xi), which include both
endpoints), positive weights that integrate polynomials up to degree 2N-1
exactly, a first-order differentiation matrix D for the Lagrange cardinal
basis, and the stiffness matrix S of cardinal-derivative inner products.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "GllRule",
    "legendre_eval",
    "gll_rule",
    "cardinal_diff_matrix",
    "stiffness_matrix",
    "cardinal_values",
]

# Golub-Welsch is reliable at moderate order; beyond this we seed Newton
# from Chebyshev-Lobatto points instead of diagonalizing a large Jacobi
# matrix.
_GOLUB_WELSCH_MAX_ORDER = 60
_NEWTON_MAX_ITER = 50
_NEWTON_RESIDUAL = 1e-13


class GllError(RuntimeError):
    """Raised when a quadrature rule cannot be constructed to tolerance."""


def legendre_eval(n, xi):
    """Evaluate the Legendre polynomial L_n and its derivative at xi.

    Uses the stable upward recurrences
        (k+1) L_{k+1} = (2k+1) xi L_k - k L_{k-1}
        L'_{k+1} = L'_{k-1} + (2k+1) L_k
    and accepts scalar or array ``xi`` in [-1, 1].

    Returns
    -------
    (L_n, L'_n) : floats or ndarrays matching the shape of ``xi``
    """
    if n < 0:
        raise ValueError("polynomial degree must be >= 0")
    x = np.asarray(xi, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("Legendre evaluation outside [-1, 1]")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    L0 = np.ones_like(x)
    d0 = np.zeros_like(x)
    if n == 0:
        return (L0[0], d0[0]) if scalar else (L0, d0)
    L1 = x.copy()
    d1 = np.ones_like(x)
    for k in range(1, n):
        L2 = ((2 * k + 1) * x * L1 - k * L0) / (k + 1)
        d2 = d0 + (2 * k + 1) * L1
        L0, L1 = L1, L2
        d0, d1 = d1, d2
    return (L1[0], d1[0]) if scalar else (L1, d1)


@dataclass(frozen=True)
class GllRule:
    """Gauss-Lobatto-Legendre rule of polynomial degree ``order``.

    nodes : (order+1,) strictly increasing, nodes[0] = -1, nodes[-1] = +1
    weights : (order+1,) positive, sum exactly 2
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self):
        return self.order + 1

    def integrate(self, values):
        """Quadrature sum of samples taken at the rule's nodes."""
        return float(np.dot(self.weights, values))


def _interior_golub_welsch(N):
    # Recursion for L'_n:  xi p_n = beta_n p_{n+1} + alpha_n p_{n-1}
    # with alpha_n = (n+1)/(2n+1), beta_n = n/(2n+1).  Interior GLL nodes
    # are the eigenvalues of the symmetrized Jacobi matrix for p_1..p_{N-1}.
    n = np.arange(1, N - 1)
    off = np.sqrt(n / (2 * n + 1) * (n + 2) / (2 * n + 3))
    return sla.eigh_tridiagonal(np.zeros(N - 1), off, eigvals_only=True)


def _newton_polish(N, nodes):
    # Newton on zeta(xi) = (1 - xi^2) L'_N(xi).  Using the identities
    # zeta = N (L_{N-1} - xi L_N) and zeta' = -N(N+1) L_N the update is
    # xi <- xi - (xi L_N - L_{N-1}) / ((N+1) L_N), exact at the endpoints.
    for _ in range(_NEWTON_MAX_ITER):
        LN, _ = legendre_eval(N, nodes)
        LNm1, _ = legendre_eval(N - 1, nodes)
        step = (nodes * LN - LNm1) / ((N + 1) * LN)
        nodes = nodes - step
        if np.max(np.abs(step)) < 1e-16:
            break
    LN, dLN = legendre_eval(N, nodes)
    residual = np.abs((1.0 - nodes**2) * dLN)
    if np.max(residual) > _NEWTON_RESIDUAL * max(1.0, N * (N + 1) / 4):
        raise GllError(
            f"Newton polishing stalled at residual {np.max(residual):.3e} "
            f"for order {N}"
        )
    return nodes, LN


def gll_rule(N):
    """Construct the GLL rule of degree N >= 1.

    Interior nodes come from the Golub-Welsch eigenvalue problem for the
    L'_N recursion (Chebyshev-Lobatto initial guesses at high order), then
    are polished by Newton iteration on (1 - xi^2) L'_N.  Weights follow
    the closed form 2 / (N (N+1) L_N(xi_j)^2).
    """
    if N < 1:
        raise ValueError("GLL rule needs degree N >= 1")
    if N == 1:
        return GllRule(1, np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    if N <= _GOLUB_WELSCH_MAX_ORDER:
        interior = np.sort(_interior_golub_welsch(N))
    else:
        interior = -np.cos(np.pi * np.arange(1, N) / N)
    nodes = np.concatenate([[-1.0], interior, [1.0]])
    nodes, LN = _newton_polish(N, nodes)
    nodes[0], nodes[-1] = -1.0, 1.0
    # enforce exact antisymmetry of the node set
    nodes = 0.5 * (nodes - nodes[::-1])
    LN, _ = legendre_eval(N, nodes)
    weights = 2.0 / (N * (N + 1) * LN**2)
    return GllRule(N, nodes, weights)


def cardinal_diff_matrix(rule):
    """First-order differentiation matrix of the GLL cardinal basis.

    D[i, j] is the derivative of the j-th cardinal function at node i:
        -N(N+1)/4                       i = j = 0
        +N(N+1)/4                       i = j = N
        0                               interior diagonal
        L_N(xi_i) / (L_N(xi_j) (xi_i - xi_j))   otherwise
    """
    N = rule.order
    xi = rule.nodes
    LN, _ = legendre_eval(N, xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = LN[:, None] / (LN[None, :] * (xi[:, None] - xi[None, :]))
    np.fill_diagonal(D, 0.0)
    D[0, 0] = -N * (N + 1) / 4.0
    D[N, N] = N * (N + 1) / 4.0
    return D


def stiffness_matrix(rule):
    """Stiffness matrix S[m, n] = integral of d(cardinal_m) d(cardinal_n).

    Evaluated with the rule's own quadrature: S = B^T B where
    B = diag(sqrt(w)) D, which is exact because the integrand has degree
    2N-2.  S is symmetric positive semidefinite with the constant vector
    in its null space.
    """
    D = cardinal_diff_matrix(rule)
    B = np.sqrt(rule.weights)[:, None] * D
    S = B.T @ B
    return 0.5 * (S + S.T)


def cardinal_values(rule, j, xi):
    """Sample the j-th cardinal function at arbitrary points of [-1, 1].

    Implements the closed form
        delta_j(xi) = -(1 - xi^2) L'_N(xi) / (N (N+1) L_N(xi_j) (xi - xi_j))
    with the limit value at xi -> xi_j filled in exactly.
    """
    N = rule.order
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    LN_j, _ = legendre_eval(N, rule.nodes[j])
    LN, dLN = legendre_eval(N, x)
    out = np.empty_like(x)
    dx = x - rule.nodes[j]
    near = np.abs(dx) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(1.0 - x**2) * dLN / (N * (N + 1) * LN_j * dx)
    out[near] = 1.0
    return out
