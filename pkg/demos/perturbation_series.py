"""
Eigenvalues of an affine matrix family as a power series
========================================================

Expand the eigenvalues of ``A0 + t A1`` to order 8 and compare with a
direct eigendecomposition.
"""

import numpy as np
from scipy.stats import ortho_group

import ultragraph as ug

rng = np.random.default_rng(1)
n = 6
lam = np.cumsum(rng.uniform(1, 2, n))
lam = (lam - lam.mean()) / np.linalg.norm(lam - lam.mean())
Q = ortho_group.rvs(n, random_state=rng)
A0 = (Q * lam) @ Q.T
M = rng.normal(size=(n, n))
A1 = M @ M.T
A1 /= np.linalg.norm(A1)

s = ug.perturbation_series(A0, A1, 8)
for t in (1e-2, 3e-2, 1e-1):
    vals, _ = ug.evaluate_series(s, t)
    err = np.abs(vals - np.linalg.eigvalsh(A0 + t * A1)).max()
    print(f"t={t:<5} max error {err:.2e}")

# coefficient norms against their a-priori bounds, with A1 shrunk first
A1_small = A1 * s.d_min / 10
rep = ug.proposition_bound_check(A0, A1_small, 6)
for r in rep.rows:
    print(f"k={r.k} |V_k|={r.norm:.3e} bound={r.bound:.3e}")

# the bound on |lam(1) - lam0| needs ||A1|| < d_min/6
print(ug.error_bound(np.linalg.norm(A1_small), s.d_min))
print(ug.error_bound(np.linalg.norm(A1), s.d_min))
