"""
Partitioning the worked example graph
=====================================

Sweep the Vietoris-Rips thresholds of a six-vertex graph and read off the
clusters, the quotient graph and the objective at every step.
"""

import os

import ultragraph as ug

# the edge list ships with the package data
here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "..", "data", "fig1.tsv")) as fh:
    g = ug.parse_edge_list(fh.read())
print(g.vertices, len(g.edges), "edges")

# thresholds are visited from coarse to fine
sweep = ug.minimize_phi(g)
for r in sweep.trace:
    print(f"eps={r.epsilon:<4} Phi={r.phi:.6f} clusters={r.clusters}")
print("minimizers:", sweep.minimizers)

# contract the clusters at eps = 1
part = ug.build_partition(g, 1.0)
for u, v, w in part.quotient.edges:
    print(f"{u} -- {v}: {w}")

# the quotient is a triangle, so one independent cycle
print(ug.genus_report(g))
