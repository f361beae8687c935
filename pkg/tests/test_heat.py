import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from oracles import graphs
from ultragraph.errors import DimensionMismatch, UltragraphError
from ultragraph.graph_core import DistanceMatrix, graph_distance, parse_edge_list
from ultragraph.heat import (
    PsiBound,
    compare_solutions,
    default_times,
    expm_oracle,
    heat_error_bound,
    solve_heat,
)
from ultragraph.perturbation import HypothesisFailed
from ultragraph.spectral import kernel_laplacian

seeds = st.integers(0, 2**32 - 1)

# the hypothesis norm < d_min/6 holds for both operator pairs here
SMALL_TEXT = "a b 1\nc d 2\nb c 100\n"


def random_laplacian(rng, n):
    k = rng.uniform(0.1, 2.0, size=(n, n))
    k = np.triu(k, 1)
    k = k + k.T
    return np.diag(k.sum(axis=1)) - k


# ---------------------------------------------------------------- solver


def test_default_times():
    t = default_times()
    assert t[0] == 0.0 and len(t) == 33
    assert t[1] == pytest.approx(1e-3) and t[-1] == pytest.approx(1e2)


@pytest.mark.parametrize("rho, alpha", [(1.0, 1.0), (2.0, 0.5)])
def test_two_point_closed_form(rho, alpha):
    L = kernel_laplacian(DistanceMatrix(("p", "q"), np.array([[0, rho], [rho, 0.0]])), alpha)
    times = np.linspace(0, 5, 11)
    sol = solve_heat(L, [1.0, 0.0], times)
    e = np.exp(-2 * rho ** (-alpha) * times)
    ref = 0.5 * np.column_stack([1 + e, 1 - e])
    assert np.abs(sol.states - ref).max() <= 1e-14


def test_t_zero_and_constants(fig1):
    L = kernel_laplacian(graph_distance(fig1), 1.0)
    u0 = np.arange(6.0)
    sol = solve_heat(L, u0, [0.0, 1.0])
    assert np.array_equal(sol.states[0], u0)
    const = solve_heat(L, np.full(6, 2.5), default_times())
    assert np.abs(const.states - 2.5).max() <= 1e-12


def test_zero_operator():
    u0 = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(expm_oracle(np.zeros((3, 3)), u0, 4.0), u0)
    assert np.allclose(solve_heat(np.zeros((3, 3)), u0, [3.0]).states[0], u0, rtol=0, atol=1e-15)


def test_solver_errors():
    with pytest.raises(DimensionMismatch):
        solve_heat(np.eye(2), [1.0, 2.0, 3.0], [0.0])
    with pytest.raises(UltragraphError):
        solve_heat(np.eye(2), [1.0, 2.0], [-1.0])


@given(st.integers(1, 12), seeds)
def test_solver_matches_expm(n, seed):
    rng = np.random.default_rng(seed)
    L = random_laplacian(rng, n)
    u0 = rng.normal(size=n)
    times = np.linspace(0, 10, 6)
    sol = solve_heat(L, u0, times)
    for t, u in zip(times, sol.states):
        assert np.abs(u - expm_oracle(L, u0, t)).max() <= 1e-8
        assert np.abs(u - scipy.linalg.expm(-t * L) @ u0).max() <= 1e-8


@given(graphs(max_n=12), seeds, st.sampled_from([0.5, 1.0, 2.0]))
def test_mass_and_contraction(g, seed, alpha):
    L = kernel_laplacian(graph_distance(g), alpha)
    u0 = np.random.default_rng(seed).normal(size=g.n)
    sol = solve_heat(L, u0, default_times())
    assert np.abs(sol.mass() - u0.sum()).max() <= 1e-9 * max(1.0, np.abs(u0).sum())
    norms = np.linalg.norm(sol.states, axis=1)
    assert np.all(np.diff(norms) <= 1e-12 * norms[0])


@given(graphs(max_n=10), seeds)
def test_long_time_limit(g, seed):
    L = kernel_laplacian(graph_distance(g), 1.0)
    u0 = np.random.default_rng(seed).normal(size=g.n)
    gap = np.linalg.eigvalsh(L.matrix)[1]
    t = 40.0 / gap
    u = solve_heat(L, u0, [t]).states[0]
    assert np.linalg.norm(u - u0.mean()) <= 1e-8


# ---------------------------------------------------------------- bounds


def test_psi_bound_values():
    p = PsiBound("full", "w", 1.0, 0.05, 0.6)
    assert p.limit == pytest.approx(0.1)
    assert p.value == pytest.approx(0.05 / 1.5)
    assert PsiBound("full", "w", 1.0, 0.05, 0.6, "conservative").value == pytest.approx(0.1)
    failed = PsiBound("full", "w", 1.0, 0.1, 0.6).value
    assert isinstance(failed, HypothesisFailed)
    assert PsiBound("full", "w", 1.0, 0.1, 0.6).as_dict()["value"] is None


def test_heat_error_bound_plug_in():
    pv = PsiBound("full", "w", 1.0, 0.05, 0.6)
    pl = PsiBound("full", "gamma", 1.0, 0.05, 0.6)
    assert heat_error_bound(pv, pl, 2.0, 3.0, 0.0) == pytest.approx((pv.value + 2) * 3.0)
    vals = [heat_error_bound(pv, pl, 2.0, 3.0, t) for t in np.geomspace(1e-2, 1e4, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-6
    bad = PsiBound("full", "w", 1.0, 1.0, 0.6)
    assert isinstance(heat_error_bound(bad, pl, 2.0, 3.0, 1.0), HypothesisFailed)


# ---------------------------------------------------------------- comparison


def test_comparison_small_graph():
    g = parse_edge_list(SMALL_TEXT)
    rep = compare_solutions(g, 2.0, 1.0, {"a": 1.0, "b": 0.0, "c": 0.0, "d": 0.0})
    assert len(rep.rows) == 33
    assert rep.clusters == (("a", "b"), ("c", "d"))
    maxima = []
    for row in rep.rows:
        for key in ("bound_full", "bound_quotient"):
            b = getattr(row, key)["paper"]
            assert isinstance(b, dict)
            assert b["max"] == pytest.approx(np.max(b["per_eigenvalue"]))
        maxima.append(row.bound_full["paper"]["max"])
    assert maxima[0] == pytest.approx(3.415, abs=1e-3)
    assert all(a >= b for a, b in zip(maxima, maxima[1:]))
    psi = rep.full["paper"].psi_vec
    assert psi.perturbation_norm < psi.limit
    assert psi.value == pytest.approx(7.44e-4, rel=1e-3)


def test_comparison_figure_hypothesis_fails(fig1):
    rep = compare_solutions(fig1, 1.0, 1.0, {x: float(x == "a") for x in fig1.vertices})
    row = rep.rows[5]
    assert isinstance(row.bound_full["paper"], HypothesisFailed)
    assert isinstance(row.bound_quotient["paper"], HypothesisFailed)
    assert rep.full["paper"].psi_vec.perturbation_norm == pytest.approx(1.7547, abs=1e-4)
    assert rep.full["paper"].psi_vec.limit == pytest.approx(0.0369, abs=1e-4)
    assert all(np.isfinite(r.empirical_full) for r in rep.rows)


def test_ultrametric_graph_has_zero_error():
    # unit triangle plus an apex at distance 2: d_G is already ultrametric
    g = parse_edge_list("a b 1\na c 1\nb c 1\nc d 2\na d 2\nb d 2")
    u0 = np.array([1.0, 0.0, -2.0, 0.5])
    for eps in (0.5, 1.0, 2.0):
        rep = compare_solutions(g, eps, 1.0, u0)
        assert all(r.empirical_full <= 1e-12 for r in rep.rows)
        assert all(r.empirical_quotient <= 1e-12 for r in rep.rows)


def test_constant_initial_state(fig1):
    u0 = np.full(6, 3.0)
    rep = compare_solutions(fig1, 1.0, 1.0, u0)
    tol = 1e-12 * np.linalg.norm(u0)
    assert max(r.empirical_full for r in rep.rows) <= tol
    assert max(r.empirical_quotient for r in rep.rows) <= tol


def test_single_cluster(fig1):
    rep = compare_solutions(fig1, 10.0, 1.0, np.arange(6.0), times=[0.0, 1.0])
    assert rep.quotient == {"paper": None, "conservative": None}
    assert all(r.empirical_quotient == 0.0 for r in rep.rows)


def test_comparison_input_errors(fig1):
    with pytest.raises(DimensionMismatch):
        compare_solutions(fig1, 1.0, 1.0, np.ones(3))


@given(graphs(max_n=10), st.floats(0.5, 4), seeds)
def test_empirical_error_properties(g, eps, seed):
    u0 = np.random.default_rng(seed).normal(size=g.n)
    times = np.concatenate([default_times(), [1e4]])
    rep = compare_solutions(g, eps, 1.0, u0, times=times)
    cap = 2 * np.linalg.norm(u0)
    assert all(r.empirical_full <= cap * (1 + 1e-12) for r in rep.rows)
    assert all(r.empirical_quotient <= cap * (1 + 1e-12) for r in rep.rows)
    assert rep.rows[0].empirical_full == 0.0
    # both flows end at the mean of u0
    assert rep.rows[-1].empirical_full <= 1e-6 * max(1.0, cap)
