"""
Vietoris-Rips partitions of a weighted graph and the objectives used to
choose the threshold.

Clusters at threshold ``eps`` are the connected components of the graph
joining vertices at graph distance ``<= eps``; these coincide with the
components of the minimum spanning tree after dropping edges longer than
``eps``.  Inside a cluster the metric is the restriction of the global
graph distance; between clusters it is the graph distance of the quotient
graph whose edge lengths are minimal connecting edge lengths.
"""

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import FewerThanTwoPoints, InvalidPartition, UltragraphError
from .graph_core import (
    WeightedGraph,
    graph_distance,
    minimax_matrix,
    minimum_spanning_tree,
    single_linkage_merges,
    subdominant_ultrametric,
)
from .spectral import kernel_laplacian, laplacian_from_kernel, min_distinct_gap

PHI_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Partition:
    """Clusters of the Vietoris-Rips graph at ``epsilon``.

    ``labels[i]`` names ``clusters[i]`` and is the corresponding vertex of
    ``quotient``.  ``cluster_ultrametrics`` maps the label of every cluster
    with at least two vertices to its subdominant ultrametric.
    """

    epsilon: float
    clusters: tuple
    labels: tuple
    quotient: WeightedGraph
    cluster_ultrametrics: dict = field(repr=False)

    @property
    def n_clusters(self):
        return len(self.clusters)

    def cluster_of(self):
        return {x: c for c, cl in enumerate(self.clusters) for x in cl}


@dataclass(frozen=True)
class PhiReport:
    """Value of the partition objective at one threshold.

    ``tau_clusters`` lists ``(cluster, tau_C)`` in cluster order, with
    ``tau_C = 0`` for singletons; ``tau_quotient`` is 0 for one cluster.
    """

    epsilon: float
    tau_quotient: float
    tau_clusters: tuple
    phi: float

    def recompute(self):
        total = (self.tau_quotient - 1.0) ** 2
        for _, t in self.tau_clusters:
            total += (t - 1.0) ** 2
        return total

    @property
    def clusters(self):
        return [c for c, _ in self.tau_clusters]

    def tau_l1(self):
        return abs(self.tau_quotient) + sum(abs(t) for _, t in self.tau_clusters)


def sort_clusters(clusters):
    out = [tuple(sorted(c)) for c in clusters]
    out.sort(key=lambda c: c[0])
    return out


def cluster_labels(clusters):
    """Concatenated member labels, falling back to ``+`` joins on collision."""
    labels = ["".join(c) for c in clusters]
    if len(set(labels)) != len(labels):
        labels = ["+".join(c) for c in clusters]
    return tuple(labels)


def _components(labels, merges, eps):
    """Union of dense-MST merges of length ``<= eps``; returns sorted clusters."""
    n = len(labels)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, w in merges:
        if w > eps:
            break
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(labels[i])
    return sort_clusters(groups.values())


def vietoris_rips_components(d, eps):
    """Connected components of ``{(x, y): d(x, y) <= eps}``.

    Computed from a minimum spanning tree of ``d`` with edges longer than
    ``eps`` removed.
    """
    if eps < 0:
        raise UltragraphError("threshold must be nonnegative")
    return _components(d.labels, single_linkage_merges(d.d), eps)


class _EdgeArrays:
    """Edge endpoints as index arrays, reused across quotient builds."""

    def __init__(self, g):
        idx = g.index()
        self.u = np.array([idx[u] for u, _, _ in g.edges], dtype=int)
        self.v = np.array([idx[v] for _, v, _ in g.edges], dtype=int)
        self.w = np.array([w for _, _, w in g.edges], dtype=float)
        self.index = idx


def _quotient(g, clusters, labels, edges=None):
    edges = edges or _EdgeArrays(g)
    k = len(clusters)
    cid = np.full(g.n, -1, dtype=int)
    for c, cl in enumerate(clusters):
        for x in cl:
            if x not in edges.index:
                raise InvalidPartition(f"unknown vertex {x!r}")
            if cid[edges.index[x]] != -1:
                raise InvalidPartition(f"vertex {x!r} in two clusters")
            cid[edges.index[x]] = c
    if np.any(cid < 0):
        raise InvalidPartition("clusters do not cover all vertices")
    a, b = cid[edges.u], cid[edges.v]
    cross = a != b
    lo, hi, w = np.minimum(a, b)[cross], np.maximum(a, b)[cross], edges.w[cross]
    key = lo * k + hi
    order = np.lexsort((w, key))
    key, lo, hi, w = key[order], lo[order], hi[order], w[order]
    first = np.unique(key, return_index=True)[1]
    qedges = [(labels[i], labels[j], float(x)) for i, j, x in zip(lo[first], hi[first], w[first])]
    return WeightedGraph.from_edges(qedges, vertices=labels)


def quotient_graph(g, clusters):
    """Graph on clusters; an edge carries the minimal connecting edge length.

    Vertices are labelled by the concatenated sorted member labels.
    """
    clusters = sort_clusters(clusters)
    return _quotient(g, clusters, cluster_labels(clusters))


def _betti(h):
    return len(h.edges) - h.n + 1


class _Context:
    """Per-graph data shared by every threshold of a sweep."""

    def __init__(self, g):
        if g.n == 0:
            raise UltragraphError("graph has no vertices")
        self.g = g
        self.d = graph_distance(g)
        self.delta = subdominant_ultrametric(self.d)
        self.merges = single_linkage_merges(self.d.d)
        self.edges = _EdgeArrays(g)

    def clusters(self, eps):
        return _components(self.d.labels, self.merges, eps)

    def partition(self, eps):
        clusters = self.clusters(eps)
        labels = cluster_labels(clusters)
        quotient = _quotient(self.g, clusters, labels, self.edges)
        ultras = {}
        for cl, lab in zip(clusters, labels):
            if len(cl) > 1:
                # the minimax path between two members of a cluster stays in it,
                # so the restriction of the global ultrametric is the cluster's own
                ultras[lab] = self.delta.restrict(cl)
        return Partition(float(eps), tuple(clusters), labels, quotient, ultras)

    def cluster_ids(self, clusters):
        cid = np.empty(self.g.n, dtype=int)
        for c, cl in enumerate(clusters):
            cid[[self.edges.index[x] for x in cl]] = c
        return cid

    def quotient_distance(self, cid, k):
        """Graph distance of the quotient on ``k`` clusters, as a dense array."""
        e = self.edges
        a, b = cid[e.u], cid[e.v]
        cross = a != b
        w = np.full((k, k), np.inf)
        np.minimum.at(w, (a[cross], b[cross]), e.w[cross])
        w = np.minimum(w, w.T)
        w[~np.isfinite(w)] = 0.0  # no edge
        return shortest_path(csr_matrix(w), method="D", directed=False)

    def quotient_distances(self, eps_list):
        """Yield ``(eps, clusters, quotient distance)`` for ascending thresholds.

        Joining two clusters is adding a zero-length edge between them, which
        updates all shortest paths in O(n**2):
        ``D' = min(D, D[:, i] + D[j, :], D[:, j] + D[i, :])``.
        """
        D = np.array(self.d.d)
        merges = iter(self.merges)
        pending = next(merges, None)
        for eps in eps_list:
            while pending is not None and pending[2] <= eps:
                i, j, _ = pending
                via = np.minimum(D[:, i, None] + D[None, j, :], D[:, j, None] + D[None, i, :])
                np.minimum(D, via, out=D)
                pending = next(merges, None)
            clusters = self.clusters(eps)
            reps = [self.edges.index[c[0]] for c in clusters]
            yield eps, clusters, D[np.ix_(reps, reps)]

    def evaluate(self, eps, alpha=None, base=None, clusters=None, dq=None):
        """Objective at ``eps`` and, given ``alpha`` and the ascending spectrum
        ``base`` of the graph-distance Laplacian, the spectral distance of
        ``H_eps`` to it.

        ``dq`` is the quotient distance in cluster order if already known.
        Works on index arrays only; :meth:`partition` builds the full objects.
        """
        clusters = self.clusters(eps) if clusters is None else clusters
        k = len(clusters)
        cid = self.cluster_ids(clusters)
        d, delta = self.d.d, self.delta.d
        same = cid[:, None] == cid[None, :]
        np.fill_diagonal(same, False)
        ii, jj = np.nonzero(same)
        tau_c = np.zeros(k)
        np.maximum.at(tau_c, cid[ii], d[ii, jj] / delta[ii, jj])
        if dq is None and k > 1:
            dq = self.quotient_distance(cid, k)
        tau_h = 0.0
        if k > 1:
            off = ~np.eye(k, dtype=bool)
            tau_h = float(np.max(dq[off] / minimax_matrix(dq)[off]))
        taus = tuple((cl, float(t)) for cl, t in zip(clusters, tau_c))
        report = PhiReport(float(eps), tau_h, taus, 0.0)
        report = PhiReport(report.epsilon, tau_h, taus, report.recompute())
        if alpha is None:
            return report
        p = np.where(same, delta, dq[np.ix_(cid, cid)] if k > 1 else 0.0)
        np.fill_diagonal(p, 1.0)
        kern = p ** (-float(alpha))
        np.fill_diagonal(kern, 0.0)
        spec = np.linalg.eigvalsh(laplacian_from_kernel(kern))
        return report, float(np.linalg.norm(spec - base))

    def phi(self, eps):
        return self.evaluate(eps)


def build_partition(g, eps):
    """Partition of ``g`` at threshold ``eps`` with quotient and local ultrametrics."""
    return _Context(g).partition(eps)


def phi(g, eps):
    """Partition objective ``|tau_H - 1|**2 + sum_C |tau_C - 1|**2`` at ``eps``."""
    return _Context(g).phi(eps)


def candidate_thresholds(g):
    """Distinct minimum spanning tree edge lengths, descending."""
    return sorted({w for _, _, w in minimum_spanning_tree(g)}, reverse=True)


def same_value(a, b, rtol=PHI_RTOL):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class PhiSweep:
    """Result of the threshold sweep.

    ``minimizers`` is ascending; ``trace`` follows the sweep (descending
    thresholds).
    """

    minimizers: tuple
    trace: tuple

    @property
    def best(self):
        return min(self.trace, key=lambda r: r.phi)


def _sweep(ctx, eps_list, alpha=None, base=None, threads=None):
    """Evaluate every threshold of ``eps_list`` (any order), returning
    results in that order.  Quotient distances come from one ascending pass;
    evaluations run in bounded batches on a thread pool."""
    asc = sorted(eps_list)
    results = {}
    workers = threads or os.cpu_count() or 1
    snapshots = ctx.quotient_distances(asc)

    def run(item):
        eps, clusters, dq = item
        return eps, ctx.evaluate(eps, alpha, base, clusters, dq)

    if workers <= 1:
        results.update(run(s) for s in snapshots)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while True:
                batch = list(itertools.islice(snapshots, 4 * workers))
                if not batch:
                    break
                results.update(pool.map(run, batch))
    return [results[e] for e in eps_list]


def _select(trace, compare):
    S = [trace[0].epsilon]
    ref = trace[0].phi
    for prev, cur in zip(trace, trace[1:]):
        if compare == "previous":
            ref = prev.phi
        if same_value(cur.phi, ref):
            S.append(cur.epsilon)
        elif cur.phi < ref:
            S = [cur.epsilon]
            ref = cur.phi
        # compare == "best" keeps ref as the running minimum
    return PhiSweep(tuple(sorted(S)), tuple(trace))


def _check_sweep(g, compare):
    if g.n < 2:
        raise FewerThanTwoPoints("the sweep needs at least two vertices")
    if compare not in ("best", "previous"):
        raise ValueError(f"unknown comparison rule {compare!r}")


def minimize_phi(g, threads=None, compare="best"):
    """Sweep the MST edge lengths from the longest down and collect minimizers.

    At each step the forest loses all edges of the current length and the
    next threshold is its new longest edge.  With ``compare="best"`` a new
    value replaces the minimizer set when it beats the best value so far and
    joins it on a tie, which yields the full argmin.  ``compare="previous"``
    compares against the value at the previous threshold instead.

    Raises
    ------
    FewerThanTwoPoints
        If ``g`` has fewer than two vertices.
    """
    _check_sweep(g, compare)
    ctx = _Context(g)
    trace = _sweep(ctx, candidate_thresholds(g), threads=threads)
    return _select(trace, compare)


def _perturbation_term(dm, alpha):
    """``||L_1||_F / (d_min / 6)`` for one metric table and its ultrametric."""
    ultra = subdominant_ultrametric(dm)
    L0 = kernel_laplacian(dm, alpha)
    L = kernel_laplacian(ultra, alpha, kind="subdominant_ultrametric")
    gap = min_distinct_gap(L.eigensystem().eigenvalues)
    return float(np.linalg.norm(L.matrix - L0.matrix)) / (gap / 6.0)


def big_m_objective(g, eps, alpha):
    """Sum of ``||L_1||_F / (d_min / 6)`` over clusters and the quotient.

    ``L_1`` has kernel ``delta**-alpha - d**-alpha``; ``d_min`` is the
    smallest gap between distinct eigenvalues of the ultrametric Laplacian.
    Singleton clusters and a one-vertex quotient contribute nothing.
    """
    if alpha <= 0:
        raise UltragraphError("alpha must be positive")
    ctx = _Context(g)
    part = ctx.partition(eps)
    total = 0.0
    for cl in part.clusters:
        if len(cl) > 1:
            total += _perturbation_term(ctx.d.restrict(cl), alpha)
    if part.n_clusters > 1:
        total += _perturbation_term(graph_distance(part.quotient), alpha)
    return total


@dataclass(frozen=True)
class GenusReport:
    augmentation: int
    mumford: int
    epsilon_augmentation: float
    epsilon_mumford: float
    tau_l1: tuple
    spectral_distances: tuple


def first_betti(h):
    """``|E| - |V| + 1`` of a connected graph."""
    return _betti(h)


def _genus(ctx, rows):
    """Genus report from ``(epsilon, tau_l1, spectral distance)`` rows, ascending."""
    eps_list = [r[0] for r in rows]
    taus = [r[1] for r in rows]
    dists = [r[2] for r in rows]
    e_aug = eps_list[int(np.argmin(taus))]
    e_mum = eps_list[int(np.argmin(dists))]
    return GenusReport(
        _betti(ctx.partition(e_aug).quotient),
        _betti(ctx.partition(e_mum).quotient),
        e_aug,
        e_mum,
        tuple(zip(eps_list, taus)),
        tuple(zip(eps_list, dists)),
    )


def _base_spectrum(ctx, alpha):
    return np.linalg.eigvalsh(kernel_laplacian(ctx.d, alpha).matrix)


def genus_report(g, alpha=1.0, threads=None):
    """Quotient Betti numbers at the two genus-defining thresholds.

    Over the candidate thresholds, the augmentation genus uses the one
    minimising the l1 norm of ``(tau_H, tau_C, ...)`` and the Mumford genus
    the one minimising the spectral distance between ``H_eps`` and ``L_0``.
    Ties go to the smaller threshold.
    """
    ctx = _Context(g)
    eps_list = sorted(candidate_thresholds(g)) if g.n > 1 else [0.0]
    base = _base_spectrum(ctx, alpha)
    out = _sweep(ctx, eps_list, alpha, base, threads)
    return _genus(ctx, [(e, r.tau_l1(), sd) for e, (r, sd) in zip(eps_list, out)])


def partition_sweep(g, alpha=1.0, threads=None, compare="best"):
    """:func:`minimize_phi` and :func:`genus_report` from a single pass."""
    _check_sweep(g, compare)
    ctx = _Context(g)
    eps_list = candidate_thresholds(g)
    base = _base_spectrum(ctx, alpha)
    out = _sweep(ctx, eps_list, alpha, base, threads)
    sweep = _select([r for r, _ in out], compare)
    rows = [(e, r.tau_l1(), sd) for e, (r, sd) in zip(eps_list, out)]
    return sweep, _genus(ctx, rows[::-1])
