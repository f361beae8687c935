"""
Dendrograms of finite ultrametric spaces and their Haar-like wavelet bases.

For a kernel Laplacian whose kernel is a function of an ultrametric, every
wavelet attached to a dendrogram node is an eigenvector.  With vertex
measure ``mu`` the operator is ``(L f)(v) = sum_w k(v, w) (f(v) - f(w)) mu(w)``
and the wavelet at a ball ``B`` of height ``rho`` has eigenvalue

    sum_{w not in B} k(B, w) mu(w) + mu(B) rho**-alpha.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotUltrametric, UltragraphError
from .spectral import eigensystem


@dataclass(frozen=True)
class Node:
    """Dendrogram node; leaves have height 0 and a single label."""

    height: float
    children: tuple
    leaves: tuple

    @property
    def is_leaf(self):
        return not self.children

    def to_dict(self):
        if self.is_leaf:
            return {"leaf": self.leaves[0]}
        return {"height": self.height, "children": [c.to_dict() for c in self.children]}

    def walk(self):
        """Pre-order traversal."""
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class Dendrogram:
    root: Node
    labels: tuple

    def to_json(self):
        return json.dumps(self.root.to_dict())

    def internal_nodes(self):
        return [v for v in self.root.walk() if not v.is_leaf]

    def leaves(self):
        return [v for v in self.root.walk() if v.is_leaf]

    def lca_heights(self):
        """Ultrametric recovered from lowest-common-ancestor heights."""
        idx = {x: i for i, x in enumerate(self.labels)}
        n = len(self.labels)
        u = np.zeros((n, n))
        for node in self.internal_nodes():
            groups = [[idx[x] for x in c.leaves] for c in node.children]
            for i, a in enumerate(groups):
                for b in groups[i + 1:]:
                    u[np.ix_(a, b)] = node.height
                    u[np.ix_(b, a)] = node.height
        return u


def _check_ultrametric(d):
    for k in range(d.shape[0]):
        if np.any(d > np.maximum(d[:, [k]], d[[k], :])):
            raise NotUltrametric("strong triangle inequality fails")


def dendrogram(delta, check=True):
    """Merge tree of an ultrametric; one node per distinct merge height.

    Children are ordered by their smallest leaf label.

    Raises
    ------
    NotUltrametric
        If ``delta`` violates the strong triangle inequality.
    """
    d = np.asarray(delta.d)
    labels = tuple(delta.labels)
    if not labels:
        raise UltragraphError("empty ultrametric")
    if check:
        _check_ultrametric(d)

    def build(ii):
        if len(ii) == 1:
            return Node(0.0, (), (labels[ii[0]],))
        sub = d[np.ix_(ii, ii)]
        h = float(sub.max())
        # below the top height, "closer than h" is an equivalence relation
        groups, seen = [], np.zeros(len(ii), dtype=bool)
        for a in range(len(ii)):
            if seen[a]:
                continue
            members = np.flatnonzero(sub[a] < h)
            seen[members] = True
            groups.append([ii[m] for m in members])
        children = [build(g) for g in groups]
        children.sort(key=lambda c: min(c.leaves))
        leaves = tuple(x for c in children for x in c.leaves)
        return Node(h, tuple(children), leaves)

    return Dendrogram(build(list(range(len(labels)))), labels)


@dataclass(frozen=True)
class Wavelet:
    ball: tuple
    height: float
    vector: np.ndarray = field(repr=False)
    eigenvalue: float = None


@dataclass(frozen=True, eq=False)
class WaveletBasis:
    labels: tuple
    wavelets: tuple
    measure: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.wavelets)

    def matrix(self):
        """Wavelets as columns."""
        if not self.wavelets:
            return np.zeros((len(self.labels), 0))
        return np.column_stack([w.vector for w in self.wavelets])

    def eigenvalues(self):
        return np.array([w.eigenvalue for w in self.wavelets], dtype=float)

    def gram(self, with_constant=True):
        """``mu``-weighted Gram matrix, optionally with the normalised constant first."""
        cols = self.matrix()
        if with_constant:
            const = np.full(len(self.labels), 1.0 / np.sqrt(self.measure.sum()))
            cols = np.column_stack([const, cols])
        return cols.T @ (self.measure[:, None] * cols)

    def to_csv(self):
        """One row per vertex, one column per wavelet, eigenvalues as last row."""
        header = ["label"] + [f"psi{i}" for i in range(len(self))]
        lines = [",".join(header)]
        m = self.matrix()
        for lab, row in zip(self.labels, m):
            lines.append(",".join([lab] + [repr(float(x)) for x in row]))
        ev = ["" if w.eigenvalue is None else repr(float(w.eigenvalue)) for w in self.wavelets]
        lines.append(",".join(["eigenvalue"] + ev))
        return "\n".join(lines) + "\n"


def _measure_vector(labels, measure):
    if measure is None:
        return np.ones(len(labels))
    if isinstance(measure, dict):
        mu = np.array([float(measure[x]) for x in labels])
    else:
        mu = np.asarray(measure, dtype=float)
    if mu.shape != (len(labels),) or np.any(mu <= 0):
        raise UltragraphError("measure must be positive on every vertex")
    return mu


def haar_basis(tree, measure=None, labels=None):
    """Haar-like wavelets of a dendrogram, orthonormal in ``l2(mu)``.

    A node with children ``C_1..C_c`` contributes, for ``j = 1..c-1``,

        (1_{C_1 u ... u C_j} / mu(C_1..C_j) - 1_{C_{j+1}} / mu(C_{j+1}))

    scaled to unit ``mu``-norm (Gram-Schmidt of the child indicators against
    constants).  ``labels`` fixes the vertex order of the vectors, which
    defaults to the tree's own label order.
    """
    labels = tuple(labels) if labels is not None else tree.labels
    idx = {x: i for i, x in enumerate(labels)}
    mu = _measure_vector(labels, measure)
    n = len(labels)
    out = []
    for node in tree.internal_nodes():
        acc = np.zeros(n, dtype=bool)
        for j, child in enumerate(node.children):
            mask = np.zeros(n, dtype=bool)
            mask[[idx[x] for x in child.leaves]] = True
            if j > 0:
                ma, mb = mu[acc].sum(), mu[mask].sum()
                psi = acc / ma - mask / mb
                psi /= np.sqrt(1.0 / ma + 1.0 / mb)
                out.append(Wavelet(node.leaves, node.height, psi))
            acc |= mask
    return WaveletBasis(labels, tuple(out), mu)


def wavelet_eigenvalue(ball, rho, dist, alpha, measure=None, form="proof"):
    """Eigenvalue attached to the wavelets of ``ball`` (merge height ``rho``).

    ``dist`` is the distance table defining the kernel; it must be constant
    on ``ball x {w}`` for every ``w`` outside the ball.  ``form="printed"``
    replaces ``mu(B) rho**-alpha`` with ``mu(B)**(1 - alpha)``, which agrees
    when ``mu(B) = rho``.
    """
    if form not in ("proof", "printed"):
        raise ValueError(f"unknown form {form!r}")
    idx = dist.index()
    mu = _measure_vector(dist.labels, measure)
    inside = np.zeros(dist.n, dtype=bool)
    inside[[idx[x] for x in ball]] = True
    block = np.asarray(dist.d)[np.ix_(inside, ~inside)]
    if block.size and np.any(block != block[0]):
        raise NotUltrametric("distance to the ball is not constant across it")
    outside = block[0] if block.size else np.zeros(0)
    external = float(np.sum(outside ** (-alpha) * mu[~inside])) if outside.size else 0.0
    mass = float(mu[inside].sum())
    own = mass * rho ** (-alpha) if form == "proof" else mass ** (1.0 - alpha)
    return external + own


def with_eigenvalues(basis, dist, alpha, form="proof"):
    """Copy of ``basis`` with each wavelet's eigenvalue filled in from ``dist``."""
    mu = dict(zip(basis.labels, basis.measure))
    ws = tuple(
        Wavelet(w.ball, w.height, w.vector,
                wavelet_eigenvalue(w.ball, w.height, dist, alpha, mu, form))
        for w in basis.wavelets
    )
    return WaveletBasis(basis.labels, ws, basis.measure)


def measure_operator(L, measure=None):
    """Matrix of ``f -> sum_w k(v, w) (f(v) - f(w)) mu(w)`` from a kernel Laplacian."""
    k = L.kernel()
    km = k * _measure_vector(L.labels, measure)[None, :]
    return np.diag(km.sum(axis=1)) - km


def local_wavelet_basis(partition, measure=None, labels=None, dist=None, alpha=None):
    """Union of the Haar-like bases of every cluster's dendrogram.

    With ``dist`` and ``alpha`` the eigenvalues are computed against that
    (full-space) distance table.
    """
    labels = tuple(labels) if labels is not None else tuple(
        x for c in partition.clusters for x in c
    )
    mu = _measure_vector(labels, measure)
    wavelets = []
    for cl, lab in zip(partition.clusters, partition.labels):
        if len(cl) < 2:
            continue
        tree = dendrogram(partition.cluster_ultrametrics[lab])
        wavelets.extend(haar_basis(tree, mu, labels).wavelets)
    basis = WaveletBasis(labels, tuple(wavelets), mu)
    if dist is not None:
        basis = with_eigenvalues(basis, dist, alpha)
    return basis


def quotient_eigenvectors(partition, dist, alpha, measure=None, labels=None):
    """Cluster-constant eigenvectors of a locally ultrametric operator.

    The operator restricted to functions constant on clusters is the
    cluster Laplacian with weights ``mu(C') k(C, C')``.  Returns eigenvalues
    and the lifted vectors (columns, ``mu``-orthonormal).
    """
    labels = tuple(labels) if labels is not None else tuple(dist.labels)
    idx = dist.index()
    mu = _measure_vector(labels, measure)
    pos = {x: i for i, x in enumerate(labels)}
    reps = [idx[c[0]] for c in partition.clusters]
    m = len(partition.clusters)
    mass = np.array([sum(mu[pos[x]] for x in c) for c in partition.clusters])
    k = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            if a != b:
                k[a, b] = dist.d[reps[a], reps[b]] ** (-alpha)
    # symmetrise D^(1/2) Q D^(-1/2) with Q = diag(k mu) - k diag(mu)
    s = np.sqrt(mass)
    S = np.diag(k @ mass) - (s[:, None] * k * s[None, :])
    es = eigensystem(S)
    g = es.eigenvectors / s[:, None]
    lifted = np.zeros((len(labels), m))
    for c, cl in enumerate(partition.clusters):
        for x in cl:
            lifted[pos[x]] = g[c]
    return np.array(es.eigenvalues), lifted


@dataclass(frozen=True)
class DiagonalizationReport:
    residuals: np.ndarray
    rayleigh: np.ndarray
    eigenvalues: np.ndarray
    quotient_residuals: np.ndarray
    rank: int
    size: int

    @property
    def max_residual(self):
        both = np.concatenate([self.residuals, self.quotient_residuals])
        return float(both.max()) if both.size else 0.0

    @property
    def full_rank(self):
        return self.rank == self.size


def diagonalization_check(L, basis, partition=None, dist=None):
    """Residuals ``||L psi - alpha_B psi||_2 / ||L||_F`` for every wavelet.

    ``L`` is applied with the basis measure.  Without a partition, the
    wavelets together with the constant vector must span the space; with a
    partition (and its distance table ``dist``) the lifted quotient
    eigenvectors complete the basis and are checked as well.
    """
    if tuple(L.labels) != tuple(basis.labels):
        raise UltragraphError("operator and basis use different vertex orders")
    M = measure_operator(L, basis.measure)
    scale = max(float(np.linalg.norm(M)), np.finfo(float).tiny)
    W = basis.matrix()
    MW = M @ W
    norms2 = (basis.measure[:, None] * W * W).sum(axis=0)
    rayleigh = (basis.measure[:, None] * W * MW).sum(axis=0) / norms2
    ev = basis.eigenvalues() if all(w.eigenvalue is not None for w in basis.wavelets) else rayleigh
    residuals = np.linalg.norm(MW - W * ev[None, :], axis=0) / scale
    extra = np.zeros((len(basis.labels), 0))
    q_res = np.zeros(0)
    if partition is not None:
        qvals, extra = quotient_eigenvectors(partition, dist, L.alpha, basis.measure, basis.labels)
        q_res = np.linalg.norm(M @ extra - extra * qvals[None, :], axis=0) / scale
    else:
        extra = np.ones((len(basis.labels), 1))
    full = np.column_stack([W, extra])
    rank = int(np.linalg.matrix_rank(full))
    return DiagonalizationReport(residuals, rayleigh, ev, q_res, rank, len(basis.labels))
