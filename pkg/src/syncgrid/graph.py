"""Algebraic graph primitives for oscillator networks.

A network is an undirected, connected, positively weighted graph.  Each
edge carries a fixed orientation (source < sink, lexicographic) so that
the incidence matrix B, the Laplacian L = B diag(a) B^T, its pseudoinverse,
and the cycle space Ker(B) are all well defined and reproducible.  The
incidence sign convention is +1 at the sink and -1 at the source, so
(B^T x)_e = x_sink - x_source.

Results of the synchronization analysis are orientation invariant; the
fixed convention only pins down signs in golden outputs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateGraphError,
    DimensionMismatchError,
    DisconnectedGraphError,
)

# Relative tolerance for declaring a Laplacian eigenvalue zero.
ZERO_EIGENVALUE_RTOL = 1e-9


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph with an oriented edge list.

    Node ids are 1..n.  Edges are stored sorted lexicographically as
    (source, sink, weight) with source < sink and weight > 0.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise DegenerateGraphError(f"node count must be positive, got {self.n}")
        seen: set[tuple[int, int]] = set()
        for i, j, w in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i},{j}) outside node range 1..{self.n}")
            if i > j:
                raise ValueError(f"edge ({i},{j}) not lexicographically oriented")
            if not w > 0:
                raise ValueError(f"edge ({i},{j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Build a graph, normalizing edge orientation and order."""
        normalized = []
        for i, j, w in edges:
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            normalized.append((i, j, float(w)))
        normalized.sort(key=lambda e: (e[0], e[1]))
        return cls(n=n, edges=tuple(normalized))

    # --- cached edge arrays (0-based indices) ---

    @cached_property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def sources(self) -> np.ndarray:
        return np.array([e[0] - 1 for e in self.edges], dtype=np.intp)

    @cached_property
    def sinks(self) -> np.ndarray:
        return np.array([e[1] - 1 for e in self.edges], dtype=np.intp)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e[0], e[1]): k for k, e in enumerate(self.edges)}

    def incidence(self) -> np.ndarray:
        """Dense oriented incidence matrix B, shape (n, m)."""
        b = np.zeros((self.n, self.m))
        b[self.sources, np.arange(self.m)] = -1.0
        b[self.sinks, np.arange(self.m)] = 1.0
        return b

    def laplacian(self) -> np.ndarray:
        """Weighted Laplacian L = B diag(a) B^T."""
        lap = np.zeros((self.n, self.n))
        s, t, w = self.sources, self.sinks, self.weights
        np.add.at(lap, (s, s), w)
        np.add.at(lap, (t, t), w)
        np.add.at(lap, (s, t), -w)
        np.add.at(lap, (t, s), -w)
        return lap

    def weighted_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n)
        np.add.at(deg, self.sources, self.weights)
        np.add.at(deg, self.sinks, self.weights)
        return deg

    def with_weights(self, weights) -> "WeightedGraph":
        """Same topology with a new weight per (sorted) edge."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.m,):
            raise DimensionMismatchError(f"expected {self.m} weights, got {w.shape}")
        return WeightedGraph(self.n, tuple((i, j, float(wk)) for (i, j, _), wk in zip(self.edges, w)))

    def scaled(self, factor: float) -> "WeightedGraph":
        """Uniformly scale all coupling weights."""
        return self.with_weights(self.weights * float(factor))


def edge_differences(g: WeightedGraph, x) -> np.ndarray:
    """B^T x: per-edge differences x_sink - x_source."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise DimensionMismatchError(f"expected length-{g.n} vector, got {x.shape}")
    return x[g.sinks] - x[g.sources]


def edge_infinity_norm(g: WeightedGraph, x) -> float:
    """Worst dissimilarity over edges: max_{(i,j) in E} |x_i - x_j|."""
    if g.m == 0:
        return 0.0
    return float(np.max(np.abs(edge_differences(g, x))))


def divergence(g: WeightedGraph, psi) -> np.ndarray:
    """B diag(a) psi: net weighted flow into each node."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (g.m,):
        raise DimensionMismatchError(f"expected length-{g.m} edge vector, got {psi.shape}")
    flow = g.weights * psi
    out = np.zeros(g.n)
    np.add.at(out, g.sinks, flow)
    np.subtract.at(out, g.sources, flow)
    return out


def is_connected(g: WeightedGraph) -> bool:
    """Union-find connectivity check (independent of any spectral test)."""
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in g.edges:
        ra, rb = find(i - 1), find(j - 1)
        if ra != rb:
            parent[ra] = rb
    root = find(0)
    return all(find(k) == root for k in range(g.n))


def require_connected(g: WeightedGraph) -> None:
    if not is_connected(g):
        raise DisconnectedGraphError(f"graph with {g.n} nodes and {g.m} edges is not connected")


@dataclass(frozen=True)
class LaplacianBundle:
    """Laplacian with spectrum and Moore-Penrose pseudoinverse.

    eigenvalues are ascending; eigenvectors columns are orthonormal.  The
    pseudoinverse inverts every eigenvalue except the structural zero.
    """

    L: np.ndarray
    Ldagger: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def lambda_n(self) -> float:
        return float(self.eigenvalues[-1])


def build_laplacian(g: WeightedGraph) -> LaplacianBundle:
    """Eigendecompose L and assemble its pseudoinverse.

    The zero eigenvalue is detected with relative tolerance
    ZERO_EIGENVALUE_RTOL * lambda_n and inverted to 0.
    """
    if g.n < 2:
        raise DegenerateGraphError("need at least two nodes")
    require_connected(g)
    lap = g.laplacian()
    evals, evecs = np.linalg.eigh(lap)
    lam_n = float(evals[-1])
    inv = np.zeros_like(evals)
    nonzero = np.abs(evals) > ZERO_EIGENVALUE_RTOL * max(lam_n, 1.0)
    inv[nonzero] = 1.0 / evals[nonzero]
    ldag = (evecs * inv) @ evecs.T
    return LaplacianBundle(L=lap, Ldagger=ldag, eigenvalues=evals, eigenvectors=evecs)


def solve_poisson(g: WeightedGraph, x) -> np.ndarray:
    """Return L^dagger x without forming the dense pseudoinverse.

    Solves the augmented system (L + (1/n) 1 1^T) y = x_centered and
    projects the result onto the zero-mean subspace.  Agrees with
    Ldagger @ x for connected graphs.
    """
    require_connected(g)
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise DimensionMismatchError(f"expected length-{g.n} vector, got {x.shape}")
    xc = x - x.mean()
    aug = g.laplacian() + np.full((g.n, g.n), 1.0 / g.n)
    y = np.linalg.solve(aug, xc)
    return y - y.mean()


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycles of a spanning tree, as signed edge-space vectors.

    vectors has shape (rank, m) with entries in {-1, 0, +1}; every row c
    satisfies B c = 0.  rank = m - n + 1 for connected graphs.
    """

    vectors: np.ndarray
    rank: int


def _spanning_tree(g: WeightedGraph) -> tuple[list[int], list[list[tuple[int, int]]]]:
    """BFS spanning tree from node 0.

    Returns (tree edge indices, adjacency restricted to the tree) where
    adjacency entries are (neighbor, edge index).
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for k in range(g.m):
        s, t = int(g.sources[k]), int(g.sinks[k])
        adj[s].append((t, k))
        adj[t].append((s, k))
    visited = [False] * g.n
    visited[0] = True
    tree_edges: list[int] = []
    tree_adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    queue = [0]
    while queue:
        u = queue.pop(0)
        for v, k in adj[u]:
            if not visited[v]:
                visited[v] = True
                tree_edges.append(k)
                tree_adj[u].append((v, k))
                tree_adj[v].append((u, k))
                queue.append(v)
    if not all(visited):
        raise DisconnectedGraphError("spanning tree does not reach every node")
    return tree_edges, tree_adj


def _tree_path(tree_adj: list[list[tuple[int, int]]], start: int, goal: int) -> list[tuple[int, int, int]]:
    """Path start -> goal in the tree as steps (from_node, to_node, edge index)."""
    prev: dict[int, tuple[int, int]] = {start: (-1, -1)}
    queue = [start]
    while queue:
        u = queue.pop(0)
        if u == goal:
            break
        for v, k in tree_adj[u]:
            if v not in prev:
                prev[v] = (u, k)
                queue.append(v)
    steps: list[tuple[int, int, int]] = []
    node = goal
    while node != start:
        u, k = prev[node]
        steps.append((u, node, k))
        node = u
    steps.reverse()
    return steps


def cycle_basis(g: WeightedGraph) -> CycleBasis:
    """Fundamental-cycle basis of Ker(B).

    Each non-tree edge (chord) closes one cycle: the chord is traversed
    source -> sink (+1) and the unique tree path sink -> source contributes
    +-1 per edge according to traversal versus orientation.  Trees yield an
    empty basis.
    """
    require_connected(g)
    tree_edges, tree_adj = _spanning_tree(g)
    in_tree = np.zeros(g.m, dtype=bool)
    in_tree[tree_edges] = True
    chords = [k for k in range(g.m) if not in_tree[k]]
    rank = g.m - g.n + 1
    vectors = np.zeros((len(chords), g.m))
    for row, k in enumerate(chords):
        s, t = int(g.sources[k]), int(g.sinks[k])
        vectors[row, k] = 1.0
        for u, v, ke in _tree_path(tree_adj, t, s):
            vectors[row, ke] = 1.0 if int(g.sources[ke]) == u else -1.0
    assert len(chords) == rank
    return CycleBasis(vectors=vectors, rank=rank)


@dataclass(frozen=True)
class ConnectivityMetrics:
    """Spectral and resistive connectivity summary."""

    lambda2: float
    lambda_n: float
    max_degree: float
    Ldagger: np.ndarray

    def effective_resistance(self, i: int, j: int) -> float:
        """R_ij = Ldag_ii + Ldag_jj - 2 Ldag_ij (1-based node ids)."""
        a, b = i - 1, j - 1
        return float(self.Ldagger[a, a] + self.Ldagger[b, b] - 2.0 * self.Ldagger[a, b])


def connectivity_metrics(g: WeightedGraph, bundle: LaplacianBundle | None = None) -> ConnectivityMetrics:
    """Algebraic connectivity, spectral radius, weighted max degree and R_ij."""
    if bundle is None:
        bundle = build_laplacian(g)
    return ConnectivityMetrics(
        lambda2=bundle.lambda2,
        lambda_n=bundle.lambda_n,
        max_degree=float(np.max(g.weighted_degrees())),
        Ldagger=bundle.Ldagger,
    )


def is_tree(g: WeightedGraph) -> bool:
    return is_connected(g) and g.m == g.n - 1


def is_single_cycle(g: WeightedGraph) -> bool:
    """True when the graph is one cycle: connected, m == n, all degrees 2."""
    if g.m != g.n or g.n < 3 or not is_connected(g):
        return False
    deg = np.zeros(g.n, dtype=int)
    np.add.at(deg, g.sources, 1)
    np.add.at(deg, g.sinks, 1)
    return bool(np.all(deg == 2))


# --- serialization ---

def graph_to_dict(g: WeightedGraph) -> dict:
    return {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges]}


def graph_from_dict(d: dict) -> WeightedGraph:
    return WeightedGraph.from_edges(int(d["n"]), d["edges"])


def load_graph(path: str) -> WeightedGraph:
    """Read a graph from JSON ({"n": ..., "edges": [[i,j,w], ...]})
    or from an edge-list CSV with header i,j,weight (n inferred)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return graph_from_dict(json.loads(text))
    reader = csv.DictReader(io.StringIO(text))
    edges = []
    max_id = 0
    for row in reader:
        i, j, w = int(row["i"]), int(row["j"]), float(row["weight"])
        edges.append((i, j, w))
        max_id = max(max_id, i, j)
    return WeightedGraph.from_edges(max_id, edges)


def save_graph(g: WeightedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g), fh, indent=1, sort_keys=True)
        fh.write("\n")
