"""
Weighted graphs, shortest-path metrics, minimum spanning trees and
subdominant ultrametrics.

Vertex order is first appearance in the input and every matrix in the
package is indexed in that order.  Undirected edges are stored as
``(u, v, w)`` with ``u < v`` in string order.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    FewerThanTwoPoints,
    MalformedLine,
    NonPositiveWeight,
    UltragraphError,
)

__all__ = [
    "WeightedGraph",
    "DistanceMatrix",
    "UltraMatrix",
    "parse_edge_list",
    "graph_distance",
    "minimum_spanning_tree",
    "subdominant_ultrametric",
    "augmentation_factor",
    "random_connected_graph",
]


def _edge_key(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph with positive edge lengths.

    Parameters
    ----------
    vertices : tuple of str
        Vertex labels in their canonical order.
    edges : tuple of (str, str, float)
        Each edge once, endpoints in string order.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        seen = set()
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise UltragraphError("duplicate vertex labels")
        for u, v, w in self.edges:
            if u == v:
                raise UltragraphError(f"loop at {u!r}")
            if not u < v:
                raise UltragraphError(f"edge ({u!r}, {v!r}) not in canonical order")
            if u not in vset or v not in vset:
                raise UltragraphError(f"edge ({u!r}, {v!r}) has unknown endpoint")
            if not w > 0 or not np.isfinite(w):
                raise NonPositiveWeight(f"weight {w!r} on edge {u}-{v}")
            if (u, v) in seen:
                raise DuplicateEdge(f"edge {u}-{v} given twice")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, edges, vertices=None):
        """Build a graph from ``(u, v, w)`` triples in any endpoint order.

        Vertices not listed in ``vertices`` are appended in order of first
        appearance in ``edges``.
        """
        order = list(vertices) if vertices is not None else []
        known = set(order)
        canon = []
        for u, v, w in edges:
            for x in (u, v):
                if x not in known:
                    known.add(x)
                    order.append(x)
            a, b = _edge_key(u, v)
            canon.append((a, b, float(w)))
        return cls(tuple(order), tuple(canon))

    @property
    def n(self):
        return len(self.vertices)

    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def adjacency(self):
        """Sparse symmetric matrix of edge lengths (zero means no edge)."""
        n = self.n
        idx = self.index()
        if not self.edges:
            return csr_matrix((n, n))
        rows = [idx[u] for u, _, _ in self.edges]
        cols = [idx[v] for _, v, _ in self.edges]
        w = [w for _, _, w in self.edges]
        m = csr_matrix((w + w, (rows + cols, cols + rows)), shape=(n, n))
        return m

    def is_connected(self):
        if self.n == 0:
            return False
        k, _ = connected_components(self.adjacency(), directed=False)
        return k == 1

    def to_edge_list(self):
        return "".join(f"{u} {v} {w!r}\n" for u, v, w in self.edges)


def parse_edge_list(text):
    """Parse ``u v w`` lines into a :class:`WeightedGraph`.

    ``#`` starts a comment; blank lines are ignored.  Errors name the
    1-based line number.
    """
    order, known, edges, seen = [], set(), [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLine(f"expected 'u v w', got {raw.strip()!r}", lineno)
        u, v, ws = parts
        try:
            w = float(ws)
        except ValueError:
            raise MalformedLine(f"weight {ws!r} is not a number", lineno) from None
        if not np.isfinite(w):
            raise MalformedLine(f"weight {ws!r} is not finite", lineno)
        if u == v:
            raise MalformedLine(f"loop at vertex {u!r}", lineno)
        if w <= 0:
            raise NonPositiveWeight(f"weight {ws} must be positive", lineno)
        key = _edge_key(u, v)
        if key in seen:
            raise DuplicateEdge(
                f"edge {key[0]}-{key[1]} already given on line {seen[key]}", lineno
            )
        seen[key] = lineno
        for x in (u, v):
            if x not in known:
                known.add(x)
                order.append(x)
        edges.append((key[0], key[1], w))
    return WeightedGraph(tuple(order), tuple(edges))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric table of pairwise distances with a zero diagonal."""

    labels: tuple
    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        n = len(self.labels)
        if d.shape != (n, n):
            raise UltragraphError(f"matrix shape {d.shape} does not match {n} labels")
        if not np.all(np.isfinite(d)):
            raise DisconnectedGraph("distance matrix has non-finite entries")
        if n and (np.any(np.diag(d) != 0) or not np.array_equal(d, d.T)):
            raise UltragraphError("distances must be symmetric with zero diagonal")
        off = d[~np.eye(n, dtype=bool)]
        if np.any(off <= 0):
            raise UltragraphError("distinct points must have positive distance")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self):
        return len(self.labels)

    def index(self):
        return {v: i for i, v in enumerate(self.labels)}

    def restrict(self, labels):
        """Sub-table on ``labels`` (in the order given)."""
        idx = self.index()
        ii = [idx[x] for x in labels]
        return type(self)(tuple(labels), self.d[np.ix_(ii, ii)])

    def __getitem__(self, pair):
        idx = self.index()
        x, y = pair
        return float(self.d[idx[x], idx[y]])

    def is_metric(self, tol=1e-12):
        """Triangle inequality check, O(n^3) time and O(n^2) memory."""
        d = self.d
        for k in range(self.n):
            if np.any(d > d[:, [k]] + d[[k], :] + tol):
                return False
        return True

    def to_json(self):
        return json.dumps({"labels": list(self.labels), "rows": self.d.tolist()})

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.labels)
        for row in self.d:
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(tuple(obj["labels"]), np.array(obj["rows"], dtype=float))


class UltraMatrix(DistanceMatrix):
    """Distance table satisfying the strong triangle inequality."""

    def is_ultrametric(self):
        d = self.d
        for k in range(self.n):
            if np.any(d > np.maximum(d[:, [k]], d[[k], :])):
                return False
        return True


def graph_distance(g):
    """All-pairs shortest-path lengths of a connected graph.

    Raises
    ------
    DisconnectedGraph
        If ``g`` is empty or has more than one component.
    """
    if g.n == 0:
        raise DisconnectedGraph("graph has no vertices")
    d = shortest_path(g.adjacency(), method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise DisconnectedGraph("graph is not connected")
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(g.vertices, d)


class _DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def minimum_spanning_tree(g):
    """Kruskal's algorithm with edges sorted by ``(weight, u, v)``.

    Returns the ``n - 1`` tree edges in the order they were accepted.
    """
    if g.n == 0 or not g.is_connected():
        raise DisconnectedGraph("minimum spanning tree needs a connected graph")
    ds = _DisjointSet(g.vertices)
    tree = []
    for u, v, w in sorted(g.edges, key=lambda e: (e[2], e[0], e[1])):
        if ds.union(u, v):
            tree.append((u, v, w))
            if len(tree) == g.n - 1:
                break
    return tree


def _dense_mst(d):
    """Prim on a dense distance matrix; returns (i, j, w) index triples."""
    n = d.shape[0]
    if n < 2:
        return []
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    parent = np.zeros(n, dtype=int)
    best[0] = np.inf
    edges = []
    for _ in range(n - 1):
        j = int(np.argmin(np.where(in_tree, np.inf, best)))
        edges.append((int(parent[j]), j, float(d[parent[j], j])))
        in_tree[j] = True
        closer = d[j] < best
        best = np.where(closer, d[j], best)
        parent = np.where(closer, j, parent)
    return edges


def single_linkage_merges(d):
    """MST edges of a dense metric sorted ascending by weight."""
    return sorted(_dense_mst(np.asarray(d)), key=lambda e: e[2])


def minimax_matrix(d, merges=None):
    """Minimax path distances of a dense metric array.

    ``merges`` are its sorted minimum spanning tree edges, when known.
    """
    n = d.shape[0]
    u = np.zeros((n, n))
    members = {i: [i] for i in range(n)}
    root = list(range(n))
    for i, j, w in single_linkage_merges(d) if merges is None else merges:
        ri, rj = root[i], root[j]
        a, b = members[ri], members.pop(rj)
        u[np.ix_(a, b)] = w
        u[np.ix_(b, a)] = w
        a.extend(b)
        for k in b:
            root[k] = ri
    return u


def subdominant_ultrametric(d):
    """Largest ultrametric below ``d``: the minimax path distance.

    Each pair gets the height at which single linkage first joins it,
    i.e. the longest edge on its path through a minimum spanning tree.
    All values are copies of entries of ``d``.
    """
    return UltraMatrix(d.labels, minimax_matrix(np.asarray(d.d)))


def augmentation_factor(d, delta):
    """Dominant augmentation factor ``max d(x, y) / delta(x, y)`` over x != y.

    Raises
    ------
    FewerThanTwoPoints
        For tables with fewer than two points.
    """
    if tuple(d.labels) != tuple(delta.labels):
        raise UltragraphError("label sets differ")
    if d.n < 2:
        raise FewerThanTwoPoints("augmentation factor needs at least two points")
    off = ~np.eye(d.n, dtype=bool)
    return float(np.max(d.d[off] / delta.d[off]))


def random_connected_graph(n, rng, extra=0.3, low=0.5, high=10.0, decimals=None):
    """Random spanning tree plus each remaining pair with probability ``extra``.

    Weights are uniform on ``[low, high)``, optionally rounded to
    ``decimals`` places to provoke ties.  Labels are ``v0, v1, ...``.
    """
    labels = [f"v{i}" for i in range(n)]

    def weight():
        w = rng.uniform(low, high)
        if decimals is None:
            return w
        return max(round(w, decimals), 10.0 ** -decimals)

    perm = rng.permutation(n)
    edges = {}
    for k in range(1, n):
        a, b = labels[perm[k]], labels[perm[rng.integers(k)]]
        edges[_edge_key(a, b)] = weight()
    for i in range(n):
        for j in range(i + 1, n):
            key = _edge_key(labels[i], labels[j])
            if key not in edges and rng.random() < extra:
                edges[key] = weight()
    return WeightedGraph.from_edges(
        [(u, v, w) for (u, v), w in edges.items()], vertices=labels
    )
