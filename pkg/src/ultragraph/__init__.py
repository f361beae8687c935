"""
Locally ultrametric approximation of weighted-graph Laplacians.

Subdominant ultrametrics, Vietoris-Rips partitions chosen by a threshold
sweep, hierarchical (Parisi) operators and their Haar-like eigenbases,
eigenvalue perturbation series with their coefficient bounds, and the
error of the heat flow under the approximation.
"""

from .errors import *  # noqa: F401,F403
from .graph_core import (
    DistanceMatrix,
    UltraMatrix,
    WeightedGraph,
    augmentation_factor,
    graph_distance,
    minimum_spanning_tree,
    parse_edge_list,
    random_connected_graph,
    subdominant_ultrametric,
)
from .heat import PsiBound, compare_solutions, expm_oracle, heat_error_bound, solve_heat
from .hypergeom import (
    b_coefficient,
    b_coefficient_hypergeometric,
    c_sequence,
    gauss_sum_2f1_at_1,
    hypergeometric_2f1,
    reciprocal_gamma,
)
from .perturbation import (
    HypothesisFailed,
    error_bound,
    evaluate_series,
    perturbation_series,
    proposition_bound_check,
)
from .spectral import (
    eigensystem,
    interval_check,
    kernel_laplacian,
    parisi_operator,
    spectral_distance,
)
from .vr_partition import (
    big_m_objective,
    build_partition,
    genus_report,
    minimize_phi,
    partition_sweep,
    phi,
    quotient_graph,
    vietoris_rips_components,
)
from .wavelets import dendrogram, diagonalization_check, haar_basis, wavelet_eigenvalue, with_eigenvalues

__version__ = "0.1.0"
