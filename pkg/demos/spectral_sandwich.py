"""
Eigenvalues squeezed between two ultrametric Laplacians
=======================================================

The graph-distance Laplacian sits between the subdominant ultrametric
Laplacian and its rescaling by the augmentation factor.
"""

import numpy as np

import ultragraph as ug

rng = np.random.default_rng(0)
g = ug.random_connected_graph(10, rng, extra=0.3)
d = ug.graph_distance(g)
delta = ug.subdominant_ultrametric(d)
tau = ug.augmentation_factor(d, delta)
print(f"tau = {tau:.4f}")

for alpha in (0.5, 1.0, 2.0):
    rep = ug.interval_check(ug.kernel_laplacian(d, alpha), ug.kernel_laplacian(delta, alpha), tau, alpha)
    # lower <= value <= upper for every index
    print(f"alpha={alpha}: worst margin {rep.worst_margin:.3e}")
    print(np.column_stack([rep.lower, rep.value, rep.upper]).round(4))
