"""Differentiable selection of the K best arms.

Hard top-k is a step function of the index vector, useless for gradient
ascent.  The soft relaxation pushes every index through a sigmoid around a
shared threshold chosen so the probabilities sum to exactly K; shrinking
the temperature recovers hard selection, growing it approaches uniform.
"""

import numpy as np

from rmab_irl import soft_top_k, soft_top_k_jacobian

w = np.array([2.0, 1.5, 0.5, -0.3, -1.0])
K = 2

print(f"indices: {w}, budget K = {K}\n")
for eps in (10.0, 1.0, 0.1, 0.001):
    p = soft_top_k(w, K, eps)
    print(f"eps = {eps:>6}: p = {np.round(p, 4)}   (sum = {p.sum():.6f})")

# The Jacobian comes from implicit differentiation of the budget constraint.
# Rows sum to zero (shifting every index together changes nothing) and the
# matrix is symmetric.
eps = 0.5
jac = soft_top_k_jacobian(w, K, eps)
print(f"\nJacobian at eps = {eps}:")
print(np.round(jac, 4))
print(f"row sums: {np.round(jac.sum(axis=1), 12)}")

# Budget conservation means raising one arm's index necessarily drains pull
# probability from the others:
print(f"\ncolumn 0: raising w[0] moves probability {jac[1:, 0].sum():+.4f} away from the rest")
