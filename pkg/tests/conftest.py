"""Shared generators for randomized tests."""

from __future__ import annotations

import numpy as np

from syncgrid.graph import WeightedGraph
from syncgrid.rng import substream


def random_connected_graph(
    seed: int,
    n_min: int = 3,
    n_max: int = 12,
    weighted: bool = True,
    extra_edges: int | None = None,
) -> WeightedGraph:
    """Random spanning tree plus extra chords; connected by construction."""
    rng = substream(seed, 424242)
    n = int(rng.integers(n_min, n_max + 1))
    edges: set[tuple[int, int]] = set()
    for v in range(2, n + 1):
        u = int(rng.integers(1, v))
        edges.add((u, v))
    n_extra = int(rng.integers(0, n)) if extra_edges is None else extra_edges
    for _ in range(n_extra):
        u, v = rng.choice(np.arange(1, n + 1), size=2, replace=False)
        u, v = int(min(u, v)), int(max(u, v))
        edges.add((u, v))
    ordered = sorted(edges)
    weights = rng.uniform(0.5, 5.0, len(ordered)) if weighted else np.ones(len(ordered))
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(ordered, weights)])


def random_tree(seed: int, n_min: int = 3, n_max: int = 20, weighted: bool = True) -> WeightedGraph:
    rng = substream(seed, 515151)
    n = int(rng.integers(n_min, n_max + 1))
    edges = []
    for v in range(2, n + 1):
        u = int(rng.integers(1, v))
        edges.append((u, v))
    weights = rng.uniform(0.5, 5.0, len(edges)) if weighted else np.ones(len(edges))
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(edges, weights)])


def cycle_graph(n: int, weights=None) -> WeightedGraph:
    edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    if weights is None:
        weights = np.ones(n)
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(edges, weights)])


def random_zero_mean(seed: int, n: int, scale: float = 1.0) -> np.ndarray:
    rng = substream(seed, 636363)
    omega = rng.uniform(-scale, scale, n)
    return omega - omega.mean()
