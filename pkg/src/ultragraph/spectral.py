"""
Kernel Laplacians of finite metric spaces and their spectra.

A kernel Laplacian acts as ``(L f)(v) = sum_w k(v, w) (f(v) - f(w))`` with
``k(v, w) = dist(v, w) ** -alpha``.  The locally ultrametric (Parisi)
operators use the per-cluster subdominant ultrametric inside clusters and
a quotient distance between clusters.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IntervalViolation,
    InvalidPartition,
    NotSymmetric,
    ZeroSpectralGap,
)
from .graph_core import DistanceMatrix, graph_distance, subdominant_ultrametric

KINDS = (
    "graph_distance",
    "subdominant_ultrametric",
    "scaled_ultrametric",
    "parisi_H",
    "parisi_L",
)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def n(self):
        return len(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class KernelLaplacian:
    labels: tuple
    matrix: np.ndarray = field(repr=False)
    alpha: float
    kind: str

    @property
    def n(self):
        return len(self.labels)

    @property
    def frobenius(self):
        return float(np.linalg.norm(self.matrix))

    def kernel(self):
        """Off-diagonal kernel values ``k(v, w)`` (zero diagonal)."""
        k = -np.array(self.matrix)
        np.fill_diagonal(k, 0.0)
        return k

    def eigensystem(self):
        return eigensystem(self.matrix)

    def scaled(self, factor, kind=None):
        return KernelLaplacian(
            self.labels, factor * self.matrix, self.alpha, kind or self.kind
        )


def laplacian_from_kernel(k):
    """Dense Laplacian ``diag(k 1) - k`` for a symmetric kernel with zero diagonal."""
    k = np.array(k, dtype=float)
    np.fill_diagonal(k, 0.0)
    return np.diag(k.sum(axis=1)) - k


def kernel_laplacian(metric, alpha, kind="graph_distance"):
    """Laplacian with kernel ``metric(v, w) ** -alpha``.

    ``alpha = 0`` gives the combinatorial Laplacian of the complete graph.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    n = metric.n
    k = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    k[off] = metric.d[off] ** (-float(alpha))
    m = laplacian_from_kernel(k)
    m.setflags(write=False)
    return KernelLaplacian(tuple(metric.labels), m, float(alpha), kind)


def quotient_metric(partition, inter="metric"):
    """Distance between clusters used by the Parisi operators.

    ``inter="metric"`` is the graph distance of the quotient graph,
    ``inter="ultrametric"`` its subdominant ultrametric.
    """
    if inter not in ("metric", "ultrametric"):
        raise ValueError(f"inter must be 'metric' or 'ultrametric', got {inter!r}")
    dh = graph_distance(partition.quotient)
    if inter == "ultrametric":
        dh = subdominant_ultrametric(dh)
    return dh


def parisi_distance(d, partition, inter="metric"):
    """Locally ultrametric distance table on the vertices of ``d``.

    Intra-cluster pairs take the cluster's subdominant ultrametric; pairs in
    different clusters take the quotient distance between their clusters.
    """
    idx = d.index()
    members = [x for c in partition.clusters for x in c]
    if sorted(members) != sorted(d.labels) or len(members) != d.n:
        raise InvalidPartition("partition does not cover the metric's labels")
    cid = np.empty(d.n, dtype=int)
    for c, cluster in enumerate(partition.clusters):
        cid[[idx[x] for x in cluster]] = c
    out = np.zeros((d.n, d.n))
    if len(partition.clusters) > 1:
        dh = quotient_metric(partition, inter)
        qidx = dh.index()
        order = [qidx[lab] for lab in partition.labels]
        dq = dh.d[np.ix_(order, order)]
        out = dq[np.ix_(cid, cid)].copy()
    for cluster, lab in zip(partition.clusters, partition.labels):
        if len(cluster) < 2:
            continue
        u = partition.cluster_ultrametrics[lab]
        ii = [idx[x] for x in u.labels]
        out[np.ix_(ii, ii)] = u.d
    return DistanceMatrix(d.labels, out)


def parisi_operator(d, partition, alpha, inter="metric"):
    """Hierarchical Parisi Laplacian: ``H_eps`` for ``inter="metric"``,
    ``L_eps`` for ``inter="ultrametric"``."""
    kind = "parisi_H" if inter == "metric" else "parisi_L"
    return kernel_laplacian(parisi_distance(d, partition, inter), alpha, kind=kind)


def _canonical_signs(vecs):
    """Flip columns so the largest-magnitude entry of each is positive."""
    if vecs.size == 0:
        return vecs
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigensystem(m):
    """Full symmetric eigendecomposition, eigenvalues ascending.

    Raises
    ------
    NotSymmetric
        If ``m`` deviates from symmetry by more than ``1e-12`` (relative to
        its largest entry).
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    vecs = _canonical_signs(vecs)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return EigenSystem(vals, vecs)


def distinct_eigenvalues(values, rtol=1e-9):
    """Collapse numerically repeated eigenvalues (sorted input)."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return values
    tol = rtol * max(1.0, float(np.max(np.abs(values))))
    keep = np.concatenate([[True], np.diff(values) > tol])
    return values[keep]


def min_distinct_gap(values, rtol=1e-9):
    """Smallest gap between distinct eigenvalues.

    Raises
    ------
    ZeroSpectralGap
        If the spectrum has a single distinct value.
    """
    distinct = distinct_eigenvalues(values, rtol)
    if distinct.size < 2:
        raise ZeroSpectralGap("spectrum has no two distinct eigenvalues")
    return float(np.min(np.diff(distinct)))


@dataclass(frozen=True)
class IntervalReport:
    lower: np.ndarray
    value: np.ndarray
    upper: np.ndarray
    lower_margin: np.ndarray
    upper_margin: np.ndarray
    tau: float
    alpha: float

    @property
    def worst_margin(self):
        return float(min(self.lower_margin.min(), self.upper_margin.min()))


def interval_check(L0, Ld, tau, alpha, rtol=1e-9):
    """Verify ``tau**-alpha * lam_k(Ld) <= lam_k(L0) <= lam_k(Ld)`` for every k.

    The tolerance is ``rtol`` relative to ``max(|lam_k(Ld)|, ||Ld||_F)``,
    which is the accuracy a backward-stable eigensolver delivers.

    Raises
    ------
    IntervalViolation
        Carrying the worst ``(k, lower, value, upper)``.
    """
    if tuple(L0.labels) != tuple(Ld.labels):
        raise DimensionMismatch("operators have different labels")
    lam0 = L0.eigensystem().eigenvalues
    lam1 = Ld.eigensystem().eigenvalues
    upper = lam1
    lower = tau ** (-alpha) * lam1
    tol = rtol * np.maximum(np.abs(lam1), Ld.frobenius)
    lo_margin = lam0 - lower
    up_margin = upper - lam0
    bad = np.minimum(lo_margin, up_margin) < -tol
    if np.any(bad):
        k = int(np.argmin(np.minimum(lo_margin, up_margin) + tol))
        raise IntervalViolation(
            f"eigenvalue {k} outside its interval",
            (k, float(lower[k]), float(lam0[k]), float(upper[k])),
        )
    return IntervalReport(lower, lam0, upper, lo_margin, up_margin, float(tau), float(alpha))


def spectral_distance(a, b):
    """Euclidean distance between ascending eigenvalue vectors."""
    if a.n != b.n:
        raise DimensionMismatch(f"spectra of size {a.n} and {b.n}")
    return float(np.linalg.norm(np.asarray(a.eigenvalues) - np.asarray(b.eigenvalues)))
