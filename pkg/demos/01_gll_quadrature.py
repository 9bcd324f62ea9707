"""Gauss-Lobatto-Legendre rules: exactness, differentiation, stiffness.

Walks through the reference-interval building blocks: how fast GLL
quadrature converges on a smooth integrand, what the cardinal
differentiation matrix looks like, and the two equivalent routes to the
stiffness matrix.
"""

import numpy as np

from semdyn import cardinal_diff_matrix, gll_rule, stiffness_matrix

# ----- quadrature of a smooth function vs the analytic value
print("quadrature of cos(x) on [-1, 1] (exact: 2 sin 1)")
exact = 2.0 * np.sin(1.0)
for N in (2, 4, 6, 8, 12):
    rule = gll_rule(N)
    err = abs(rule.integrate(np.cos(rule.nodes)) - exact)
    print(f"  N={N:2d}: error {err:.3e}")

# ----- the N = 2 rule is the familiar Simpson-like (1/3, 4/3, 1/3)
rule = gll_rule(2)
print("\nN=2 nodes  ", rule.nodes)
print("N=2 weights", rule.weights)

# ----- differentiation matrix: corners are -/+ N(N+1)/4
N = 6
rule = gll_rule(N)
D = cardinal_diff_matrix(rule)
print(f"\nN={N} corner derivatives: {D[0, 0]} and {D[N, N]}")
p = rule.nodes**4
print("max error differentiating x^4:",
      np.max(np.abs(D @ p - 4 * rule.nodes**3)))

# ----- stiffness: product form against the explicit quadrature sum
S = stiffness_matrix(rule)
direct = np.einsum("q,qm,qn->mn", rule.weights, D, D)
print("stiffness product-form vs quadrature-sum max diff:",
      np.max(np.abs(S - direct)))
print("constant in the null space:", np.max(np.abs(S @ np.ones(N + 1))))
