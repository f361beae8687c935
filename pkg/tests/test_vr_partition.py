from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import (
    brute_argmin,
    brute_phi,
    floyd_warshall,
    graphs,
    kernel_laplacian_dense,
    minimax_closure,
    quotient_edges,
    threshold_components,
)
from ultragraph.errors import FewerThanTwoPoints, InvalidPartition
from ultragraph.graph_core import (
    WeightedGraph,
    graph_distance,
    parse_edge_list,
    subdominant_ultrametric,
)
from ultragraph.vr_partition import (
    _Context,
    big_m_objective,
    build_partition,
    candidate_thresholds,
    first_betti,
    genus_report,
    minimize_phi,
    partition_sweep,
    phi,
    quotient_graph,
    vietoris_rips_components,
)


def graph_from_ultrametric(u, labels=None):
    """Complete graph whose shortest paths reproduce the ultrametric ``u``."""
    n = u.shape[0]
    labels = labels or [f"u{i}" for i in range(n)]
    return WeightedGraph.from_edges(
        [(labels[i], labels[j], u[i, j]) for i in range(n) for j in range(i + 1, n)],
        vertices=labels,
    )


# ---------------------------------------------------------------- components


def test_figure_components(fig1):
    d = graph_distance(fig1)
    assert vietoris_rips_components(d, 1.0) == [("a", "c"), ("b",), ("d", "e", "f")]
    assert vietoris_rips_components(d, 0.0) == [(x,) for x in sorted(fig1.vertices)]
    assert vietoris_rips_components(d, d.d.max()) == [tuple(sorted(fig1.vertices))]


@given(graphs(max_n=12), st.floats(0, 12))
def test_components_match_threshold_bfs(g, eps):
    d = graph_distance(g)
    assert vietoris_rips_components(d, eps) == threshold_components(list(d.labels), d.d, eps)


@given(graphs(max_n=10), st.floats(0, 6), st.floats(0, 6))
def test_monotone_coarsening(g, e1, e2):
    lo, hi = sorted((e1, e2))
    d = graph_distance(g)
    fine = vietoris_rips_components(d, lo)
    coarse = [set(c) for c in vietoris_rips_components(d, hi)]
    for c in fine:
        assert any(set(c) <= big for big in coarse)


# ---------------------------------------------------------------- quotient


def test_figure_quotient(fig1):
    q = quotient_graph(fig1, [("d", "e", "f"), ("c", "a"), ("b",)])
    assert q.vertices == ("ac", "b", "def")
    assert set(q.edges) == {("ac", "b", 1.5), ("b", "def", 2.0), ("ac", "def", 3.0)}


def test_quotient_of_singletons_is_isomorphic(fig1):
    q = quotient_graph(fig1, [(x,) for x in fig1.vertices])
    assert set(q.edges) == set(fig1.edges)


def test_quotient_of_one_cluster(fig1):
    q = quotient_graph(fig1, [fig1.vertices])
    assert q.n == 1 and q.edges == ()


def test_quotient_rejects_bad_partitions(fig1):
    with pytest.raises(InvalidPartition):
        quotient_graph(fig1, [("a", "b"), ("b", "c", "d", "e", "f")])
    with pytest.raises(InvalidPartition):
        quotient_graph(fig1, [("a", "b")])
    with pytest.raises(InvalidPartition):
        quotient_graph(fig1, [("a", "b", "c", "d", "e", "f", "z")])


def test_quotient_label_collision_falls_back():
    g = parse_edge_list("a bc 1\nab c 2\nbc c 5")
    q = quotient_graph(g, [("a", "bc"), ("ab", "c")])
    assert q.vertices == ("a+bc", "ab+c")


@given(graphs(max_n=10), st.floats(0, 6))
def test_quotient_matches_oracle_and_is_metric(g, eps):
    part = build_partition(g, eps)
    ref = quotient_edges(g, part.clusters)
    got = {(part.labels.index(u), part.labels.index(v)): w for u, v, w in part.quotient.edges}
    assert got == {tuple(sorted(k)): w for k, w in ref.items()}
    assert part.quotient.n == len(part.clusters)
    if part.quotient.n > 1:
        assert graph_distance(part.quotient).is_metric(1e-12)


# ---------------------------------------------------------------- partition


def test_partition_fields(fig1):
    part = build_partition(fig1, 1.0)
    assert part.clusters == (("a", "c"), ("b",), ("d", "e", "f"))
    assert part.labels == ("ac", "b", "def")
    assert set(part.cluster_ultrametrics) == {"ac", "def"}
    assert np.all(part.cluster_ultrametrics["def"].d[~np.eye(3, dtype=bool)] == 1.0)


@given(graphs(max_n=10), st.floats(0, 6))
def test_restricted_ultrametric_equals_recomputed(g, eps):
    d = graph_distance(g)
    part = build_partition(g, eps)
    for cl, lab in zip(part.clusters, part.labels):
        if len(cl) < 2:
            continue
        own = subdominant_ultrametric(d.restrict(cl))
        assert np.array_equal(part.cluster_ultrametrics[lab].d, own.d)


@given(graphs(max_n=10), st.floats(0, 6))
def test_partition_invariants(g, eps):
    part = build_partition(g, eps)
    members = sorted(x for c in part.clusters for x in c)
    assert members == sorted(g.vertices)
    assert list(part.clusters) == sorted(part.clusters, key=lambda c: c[0])
    assert all(list(c) == sorted(c) for c in part.clusters)


# ---------------------------------------------------------------- phi


def test_figure_phi_values(fig1):
    r1 = phi(fig1, 1.0)
    assert r1.phi == 2.25
    assert r1.tau_quotient == 1.5
    assert [t for _, t in r1.tau_clusters] == [1.0, 0.0, 2.0]
    r15 = phi(fig1, 1.5)
    assert r15.phi == pytest.approx(float(Fraction(13, 9)), rel=1e-15, abs=0)
    assert phi(fig1, 2.0).phi == 4.0625


def test_phi_is_recomputable(fig1):
    for eps in (1.0, 1.5, 2.0):
        r = phi(fig1, eps)
        assert r.phi == r.recompute()


def test_phi_zero_on_ultrametric_with_two_big_clusters():
    u = np.array(
        [
            [0, 1, 4, 4],
            [1, 0, 4, 4],
            [4, 4, 0, 1],
            [4, 4, 1, 0],
        ],
        dtype=float,
    )
    # quotient distance 4 between two clusters: a single edge, tau = 1
    g = graph_from_ultrametric(u)
    r = phi(g, 1.0)
    assert r.phi == 0.0


@given(graphs(max_n=9), st.floats(0, 6))
def test_phi_matches_brute_force(g, eps):
    assert phi(g, eps).phi == pytest.approx(brute_phi(g, eps), rel=1e-12, abs=1e-12)


@given(graphs(max_n=10), st.floats(0, 6))
def test_phi_nonnegative_and_zero_characterised(g, eps):
    r = phi(g, eps)
    assert r.phi >= 0
    if r.phi == 0:
        assert all(t == 1.0 for _, t in r.tau_clusters)
        assert r.tau_quotient == 1.0


@given(graphs(max_n=10), st.floats(0, 6))
def test_fast_quotient_distance_matches_reference(g, eps):
    ctx = _Context(g)
    fast = ctx.evaluate(eps)
    part = ctx.partition(eps)
    taus = []
    d = graph_distance(g)
    for cl in part.clusters:
        if len(cl) > 1:
            sub = d.restrict(cl).d
            off = ~np.eye(len(cl), dtype=bool)
            taus.append(float(np.max(sub[off] / minimax_closure(sub)[off])))
        else:
            taus.append(0.0)
    assert [t for _, t in fast.tau_clusters] == taus
    if part.n_clusters > 1:
        dq = graph_distance(part.quotient)
        snap = dict((e, q) for e, _, q in ctx.quotient_distances([eps]))
        assert np.allclose(snap[eps], dq.d, rtol=1e-12, atol=0)


# ---------------------------------------------------------------- sweep


def test_figure_sweep(fig1):
    sweep = minimize_phi(fig1)
    assert sweep.minimizers == (1.5,)
    assert [r.epsilon for r in sweep.trace] == [2.0, 1.5, 1.0]
    assert [r.phi for r in sweep.trace] == [4.0625, phi(fig1, 1.5).phi, 2.25]
    assert sweep.best.epsilon == 1.5


def test_previous_rule_differs_from_running_minimum():
    # trace 3.25, 3.25, 4.5, 4.0: comparing with the previous step lets the
    # final 4.0 replace the true minimizers
    g = parse_edge_list(
        "v2 v4 2\nv1 v4 1\nv3 v4 6\nv3 v6 6\nv4 v5 3\n"
        "v0 v1 2\nv0 v4 2\nv0 v5 3\nv1 v2 2\nv2 v3 1\n"
    )
    best = minimize_phi(g, compare="best")
    prev = minimize_phi(g, compare="previous")
    assert [r.phi for r in best.trace] == [3.25, 3.25, 4.5, 4.0]
    assert best.minimizers == (3.0, 6.0)
    assert prev.minimizers == (1.0,)


def test_two_vertex_sweep():
    g = parse_edge_list("x y 2.5")
    sweep = minimize_phi(g)
    assert sweep.minimizers == (2.5,)
    assert len(sweep.trace) == 1


def test_sweep_needs_two_vertices():
    with pytest.raises(FewerThanTwoPoints):
        minimize_phi(WeightedGraph(("x",), ()))
    with pytest.raises(ValueError):
        minimize_phi(parse_edge_list("a b 1"), compare="sideways")


def test_sweep_thread_independence():
    rng = np.random.default_rng(11)
    from ultragraph.graph_core import random_connected_graph

    g = random_connected_graph(40, rng, extra=0.1)
    a = minimize_phi(g, threads=1)
    b = minimize_phi(g, threads=4)
    assert a.minimizers == b.minimizers
    assert [r.phi for r in a.trace] == [r.phi for r in b.trace]


@given(graphs(max_n=8))
def test_sweep_matches_brute_force(g):
    sweep = minimize_phi(g)
    cands = candidate_thresholds(g)
    expected, best, values = brute_argmin(g, cands)
    assert set(sweep.minimizers) == expected
    # nothing between candidates beats them
    assert min(values[e] for e in cands) == pytest.approx(best, rel=1e-12)


def test_ultrametric_sweep_reaches_finest_nonsingleton_cover():
    # a perfect two-level hierarchy: pairs at height 1 under a root at 3
    u = np.full((6, 6), 3.0)
    for a, b in ((0, 1), (2, 3), (4, 5)):
        u[a, b] = u[b, a] = 1.0
    np.fill_diagonal(u, 0.0)
    g = graph_from_ultrametric(u)
    sweep = minimize_phi(g)
    assert sweep.minimizers[0] == 1.0
    part = build_partition(g, sweep.minimizers[0])
    assert all(len(c) == 2 for c in part.clusters)


# ---------------------------------------------------------------- M objective


def _big_m_dense(d, alpha):
    u = minimax_closure(d)
    L0 = kernel_laplacian_dense(d, alpha)
    L = kernel_laplacian_dense(u, alpha)
    vals = np.linalg.eigvalsh(L)
    distinct = [vals[0]]
    for v in vals[1:]:
        if v - distinct[-1] > 1e-9 * max(1.0, abs(vals).max()):
            distinct.append(v)
    gap = min(np.diff(distinct))
    return np.linalg.norm(L - L0) / (gap / 6.0)


def test_big_m_figure_matches_dense_recompute(fig1):
    d = floyd_warshall(fig1)
    idx = fig1.index()
    total = 0.0
    for cl in (("a", "c"), ("d", "e", "f")):
        ii = [idx[x] for x in cl]
        total += _big_m_dense(d[np.ix_(ii, ii)], 1.0)
    dq = np.array([[0, 1.5, 3.0], [1.5, 0, 2.0], [3.0, 2.0, 0]])
    total += _big_m_dense(dq, 1.0)
    got = big_m_objective(fig1, 1.0, 1.0)
    assert got > 0
    assert got == pytest.approx(total, rel=1e-12)


def test_big_m_vanishes_on_ultrametric_clusters():
    u = np.array([[0, 1, 2], [1, 0, 2], [2, 2, 0]], dtype=float)
    g = graph_from_ultrametric(u)
    assert big_m_objective(g, 2.0, 1.0) == 0.0


def test_big_m_single_cluster_keeps_cluster_term(fig1):
    d = floyd_warshall(fig1)
    assert big_m_objective(fig1, 2.0, 1.0) == pytest.approx(_big_m_dense(d, 1.0), rel=1e-12)


# ---------------------------------------------------------------- genus


def test_figure_genus(fig1):
    gr = genus_report(fig1, alpha=1.0)
    assert gr.augmentation == 0 and gr.epsilon_augmentation == 2.0
    assert gr.mumford == 1 and gr.epsilon_mumford == 1.0
    dists = dict(gr.spectral_distances)
    assert dists[1.0] == pytest.approx(1.5326, abs=1e-4)
    assert first_betti(build_partition(fig1, 1.0).quotient) == 1


def test_genus_tree_and_single_cluster():
    g = parse_edge_list("a b 1\nb c 2\nc d 3")
    assert first_betti(build_partition(g, 1.0).quotient) == 0
    assert first_betti(build_partition(g, 3.0).quotient) == 0


def test_partition_sweep_agrees_with_separate_calls(fig1):
    sweep, gr = partition_sweep(fig1, alpha=1.0)
    assert sweep.minimizers == minimize_phi(fig1).minimizers
    ref = genus_report(fig1, alpha=1.0)
    assert (gr.augmentation, gr.mumford) == (ref.augmentation, ref.mumford)
    assert gr.spectral_distances == ref.spectral_distances


@given(graphs(min_n=3, max_n=8))
def test_genus_spectral_distance_matches_operator_route(g):
    from ultragraph.spectral import eigensystem, kernel_laplacian, parisi_operator, spectral_distance

    gr = genus_report(g, alpha=1.0)
    d = graph_distance(g)
    L0 = eigensystem(kernel_laplacian(d, 1.0).matrix)
    for eps, dist in gr.spectral_distances:
        H = parisi_operator(d, build_partition(g, eps), 1.0)
        assert dist == pytest.approx(spectral_distance(eigensystem(H.matrix), L0), rel=1e-9, abs=1e-9)
