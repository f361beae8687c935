"""
Heat semigroups of kernel Laplacians and the error between the diffusion
driven by the graph-distance operator and by its locally ultrametric
approximation.

Solutions follow the decaying convention ``u(t) = exp(-t L) u0``; both
semigroups fix constants and contract the Euclidean norm.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, UltragraphError, ZeroSpectralGap
from .graph_core import graph_distance
from .perturbation import HypothesisFailed
from .spectral import eigensystem, kernel_laplacian, min_distinct_gap, parisi_operator, quotient_metric
from .vr_partition import build_partition


def default_times():
    """0 followed by 32 geometric points on [1e-3, 1e2]."""
    return np.concatenate([[0.0], np.geomspace(1e-3, 1e2, 32)])


def _matrix(L):
    return np.asarray(getattr(L, "matrix", L), dtype=float)


@dataclass(frozen=True, eq=False)
class HeatSolution:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)

    def mass(self):
        return self.states.sum(axis=1)


def solve_heat(L, u0, times):
    """Spectral solution ``u(t) = sum_k a_k exp(-lam_k t) v_k`` with ``a = V^T u0``.

    ``states[i]`` is the solution at ``times[i]``.
    """
    m = _matrix(L)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (m.shape[0],):
        raise DimensionMismatch(f"initial condition of length {u0.size} for {m.shape[0]} vertices")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise UltragraphError("times must be nonnegative")
    es = eigensystem(m)
    a = es.eigenvectors.T @ u0
    decay = np.exp(-np.outer(times, es.eigenvalues))
    states = (decay * a[None, :]) @ es.eigenvectors.T
    # t = 0 reproduces u0 exactly
    states[times == 0] = u0
    return HeatSolution(times, states, a, np.array(es.eigenvalues))


def expm_oracle(L, u0, t, tol=1e-12):
    """``exp(-t L) u0`` by scaling and squaring of a truncated Taylor series."""
    m = -float(t) * _matrix(L)
    u0 = np.asarray(u0, dtype=float)
    norm = np.linalg.norm(m, 1)
    s = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0.5 else 0
    a = m / 2.0**s
    term = np.eye(a.shape[0])
    e = term.copy()
    for k in range(1, 60):
        term = term @ a / k
        e += term
        if np.linalg.norm(term, 1) <= tol * np.finfo(float).eps * 1e3 * np.linalg.norm(e, 1):
            break
    for _ in range(s):
        e = e @ e
    return e @ u0


@dataclass(frozen=True)
class PsiBound:
    """``C n (1 + n / (d_min/6))**-1`` (``paper``) or with ``1 - ...``
    (``conservative``), or :class:`HypothesisFailed` when ``n >= d_min/6``."""

    which: str
    component: str
    C: float
    perturbation_norm: float
    d_min: float
    variant: str = "paper"

    @property
    def limit(self):
        return self.d_min / 6.0

    @property
    def value(self):
        n = self.perturbation_norm
        if not n < self.limit:
            return HypothesisFailed(n, self.limit)
        q = n / self.limit
        return self.C * n / (1.0 + q if self.variant == "paper" else 1.0 - q)

    def as_dict(self):
        v = self.value
        return {
            "which": self.which,
            "component": self.component,
            "C": self.C,
            "perturbation_norm": self.perturbation_norm,
            "d_min": self.d_min,
            "variant": self.variant,
            "value": None if isinstance(v, HypothesisFailed) else v,
            "hypothesis_holds": not isinstance(v, HypothesisFailed),
        }


def heat_error_bound(psi_vec, psi_val, eig1, a_l1, t):
    """``(exp(-eig1 t) Psi_vec + 2 exp(-Psi_val t)) ||a||_1``.

    Returns the :class:`HypothesisFailed` of either Psi if its hypothesis
    does not hold.
    """
    for p in (psi_vec, psi_val):
        if isinstance(p.value, HypothesisFailed):
            return p.value
    return (np.exp(-eig1 * t) * psi_vec.value + 2.0 * np.exp(-psi_val.value * t)) * a_l1


def _gap_or_none(values):
    try:
        return min_distinct_gap(values)
    except ZeroSpectralGap:
        return None


@dataclass(frozen=True)
class PairBounds:
    """Bounds for one operator pair; ``per_eigenvalue[i][j]`` is the bound
    for eigenvalue ``j`` at time ``i``."""

    psi_vec: PsiBound
    psi_val: PsiBound
    a_l1: float
    eigenvalues: np.ndarray = field(repr=False)

    def evaluate(self, t):
        b = [heat_error_bound(self.psi_vec, self.psi_val, lam, self.a_l1, t) for lam in self.eigenvalues]
        if b and isinstance(b[0], HypothesisFailed):
            return b[0]
        return np.array(b)


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    empirical_full: float
    empirical_quotient: float
    bound_full: dict
    bound_quotient: dict


@dataclass(frozen=True)
class ComparisonReport:
    epsilon: float
    alpha: float
    C: float
    clusters: tuple
    rows: tuple
    full: dict
    quotient: dict


def _pair(which, comps, C, norm, d_min, eigenvalues, coeffs):
    out = {}
    for variant in ("paper", "conservative"):
        if d_min is None:
            out[variant] = None
            continue
        pv = PsiBound(which, comps[0], C, norm, d_min, variant)
        pl = PsiBound(which, comps[1], C, norm, d_min, variant)
        out[variant] = PairBounds(pv, pl, float(np.abs(coeffs).sum()), np.asarray(eigenvalues))
    return out


def _summarise(bounds, t):
    row = {}
    for variant, pair in bounds.items():
        if pair is None:
            row[variant] = None
            continue
        per = pair.evaluate(t)
        if isinstance(per, HypothesisFailed):
            row[variant] = per
        else:
            row[variant] = {"max": float(per.max()), "per_eigenvalue": per}
    return row


def cluster_operator(partition, alpha, inter):
    """Symmetric form ``D^(1/2) Q D^(-1/2)`` of the cluster-level operator
    with counting measure (``D`` the cluster sizes).

    Returns the matrix and ``sqrt(D)`` in the order of ``partition.clusters``.
    """
    dh = quotient_metric(partition, inter)
    qidx = dh.index()
    order = [qidx[lab] for lab in partition.labels]
    k = dh.d[np.ix_(order, order)].copy()
    off = ~np.eye(len(order), dtype=bool)
    k[off] = k[off] ** (-float(alpha))
    mass = np.array([len(c) for c in partition.clusters], dtype=float)
    s = np.sqrt(mass)
    return np.diag(k @ mass) - s[:, None] * k * s[None, :], s


def compare_solutions(g, eps, alpha, u0, times=None, C=1.0):
    """Empirical and bounded errors of the locally ultrametric heat flow.

    Full space: ``L_0`` (graph distance) against ``H_eps``, written as
    ``H_eps = L_0 + A_eps`` with ``d_min`` the smallest distinct-eigenvalue
    gap of ``L_0``.  Cluster level: the operator with ultrametric quotient
    distances against the one with metric quotient distances, written as
    ``H_bar = L_bar + B_bar`` with ``d_min`` taken from ``L_bar``.  Cluster
    level solutions start from the cluster means of ``u0`` and are lifted
    back constant on clusters.
    """
    if isinstance(u0, dict):
        u0 = [u0[x] for x in g.vertices]
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (g.n,):
        raise DimensionMismatch(f"initial condition of length {u0.size} for {g.n} vertices")
    times = default_times() if times is None else np.asarray(times, dtype=float)

    d = graph_distance(g)
    part = build_partition(g, eps)
    L0 = kernel_laplacian(d, alpha)
    H = parisi_operator(d, part, alpha, inter="metric")
    A = H.matrix - L0.matrix
    es_H = eigensystem(H.matrix)
    a_H = es_H.eigenvectors.T @ u0
    full = _pair("full", ("w", "gamma"), C, float(np.linalg.norm(A)),
                 _gap_or_none(L0.eigensystem().eigenvalues), es_H.eigenvalues, a_H)
    sol_L0 = solve_heat(L0, u0, times)
    sol_H = solve_heat(H, u0, times)

    pos = g.index()
    members = [[pos[x] for x in c] for c in part.clusters]
    if part.n_clusters > 1:
        S_H, s = cluster_operator(part, alpha, "metric")
        S_L, _ = cluster_operator(part, alpha, "ultrametric")
        ubar = np.array([u0[m].mean() for m in members])
        y0 = s * ubar
        es_SH = eigensystem(S_H)
        a_A = es_SH.eigenvectors.T @ y0
        quotient = _pair("quotient", ("v", "lambda"), C, float(np.linalg.norm(S_H - S_L)),
                         _gap_or_none(eigensystem(S_L).eigenvalues), es_SH.eigenvalues, a_A)
        yL = solve_heat(S_L, y0, times).states / s[None, :]
        yH = solve_heat(S_H, y0, times).states / s[None, :]
        cid = np.empty(g.n, dtype=int)
        for c, m in enumerate(members):
            cid[m] = c
        q_err = np.linalg.norm((yL - yH)[:, cid], axis=1)
    else:
        quotient = {"paper": None, "conservative": None}
        q_err = np.zeros(len(times))

    f_err = np.linalg.norm(sol_L0.states - sol_H.states, axis=1)
    rows = []
    for i, t in enumerate(times):
        rows.append(ComparisonRow(float(t), float(f_err[i]), float(q_err[i]),
                                  _summarise(full, t), _summarise(quotient, t)))
    return ComparisonReport(float(eps), float(alpha), float(C), part.clusters, tuple(rows), full, quotient)

