"""Graph primitives: Laplacian, pseudoinverse, cycle space, metrics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cycle_graph, random_connected_graph, random_tree, random_zero_mean
from syncgrid.errors import (
    DegenerateGraphError,
    DimensionMismatchError,
    DisconnectedGraphError,
)
from syncgrid.graph import (
    WeightedGraph,
    build_laplacian,
    connectivity_metrics,
    cycle_basis,
    edge_differences,
    edge_infinity_norm,
    graph_from_dict,
    graph_to_dict,
    is_connected,
    load_graph,
    save_graph,
    solve_poisson,
)


def test_single_edge_closed_form_pseudoinverse():
    # 2x2 oracle: L = [[a,-a],[-a,a]], Ldag = (1/(4a)) [[1,-1],[-1,1]]
    a = 2.0
    g = WeightedGraph.from_edges(2, [(1, 2, a)])
    bundle = build_laplacian(g)
    assert np.allclose(bundle.L, [[a, -a], [-a, a]])
    oracle = np.array([[1.0, -1.0], [-1.0, 1.0]]) / (4.0 * a)
    assert np.allclose(bundle.Ldagger, oracle, atol=1e-14)


def test_triangle_spectrum():
    g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    bundle = build_laplacian(g)
    assert np.allclose(bundle.L, 3.0 * np.eye(3) - np.ones((3, 3)))
    assert np.allclose(bundle.eigenvalues, [0.0, 3.0, 3.0], atol=1e-12)


def test_row_sums_vanish():
    g = random_connected_graph(7)
    lap = g.laplacian()
    assert np.max(np.abs(lap @ np.ones(g.n))) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_pseudoinverse_identity(seed):
    g = random_connected_graph(seed)
    bundle = build_laplacian(g)
    target = np.eye(g.n) - np.ones((g.n, g.n)) / g.n
    assert np.max(np.abs(bundle.L @ bundle.Ldagger - target)) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_solve_poisson_matches_pseudoinverse(seed):
    g = random_connected_graph(seed)
    x = random_zero_mean(seed, g.n)
    bundle = build_laplacian(g)
    assert np.allclose(solve_poisson(g, x), bundle.Ldagger @ x, atol=1e-10)


def test_edge_infinity_norm_examples():
    path = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
    assert edge_infinity_norm(path, [5.0, 5.0, 5.0]) == 0.0
    assert edge_infinity_norm(path, [0.0, 1.0, 3.0]) == 2.0
    k3 = WeightedGraph.from_edges(3, [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    # enumerate all three edges: |1/3+1/3|, |1/3-0|, |-1/3-0|
    assert edge_infinity_norm(k3, [1 / 3, -1 / 3, 0.0]) == pytest.approx(2 / 3, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_edge_norm_equals_incidence_route(seed):
    g = random_connected_graph(seed)
    x = random_zero_mean(seed + 1, g.n, scale=3.0)
    direct = edge_infinity_norm(g, x)
    via_b = float(np.max(np.abs(g.incidence().T @ x)))
    assert direct == via_b


def test_edge_norm_dimension_mismatch():
    g = WeightedGraph.from_edges(2, [(1, 2, 1.0)])
    with pytest.raises(DimensionMismatchError):
        edge_infinity_norm(g, [1.0, 2.0, 3.0])


def test_cycle_basis_tree_is_empty():
    t = random_tree(3)
    basis = cycle_basis(t)
    assert basis.rank == 0
    assert basis.vectors.shape == (0, t.m)


def test_cycle_basis_single_cycle_is_signed_ones():
    g = cycle_graph(6)
    basis = cycle_basis(g)
    assert basis.rank == 1
    c = basis.vectors[0]
    assert set(np.abs(c)) == {1.0}
    assert np.max(np.abs(g.incidence() @ c)) <= 1e-12


def test_cycle_basis_k4_nullspace_oracle():
    g = WeightedGraph.from_edges(4, [(1, 2, 1), (1, 3, 1), (1, 4, 1),
                                     (2, 3, 1), (2, 4, 1), (3, 4, 1)])
    basis = cycle_basis(g)
    assert basis.rank == 3
    b = g.incidence()
    assert np.max(np.abs(b @ basis.vectors.T)) <= 1e-12
    # independent null-space oracle via SVD rank factorization
    from scipy.linalg import null_space
    null = null_space(b)
    assert null.shape[1] == 3
    # basis vectors lie in the span of the SVD null space
    proj = null @ (null.T @ basis.vectors.T)
    assert np.max(np.abs(proj - basis.vectors.T)) <= 1e-10
    assert np.linalg.matrix_rank(basis.vectors) == 3


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_cycle_rank_identity(seed):
    g = random_connected_graph(seed)
    basis = cycle_basis(g)
    assert basis.rank == g.m - g.n + 1
    if basis.rank:
        assert np.max(np.abs(g.incidence() @ basis.vectors.T)) <= 1e-12


def test_connectivity_metrics_examples():
    a = 2.5
    g = WeightedGraph.from_edges(2, [(1, 2, a)])
    metrics = connectivity_metrics(g)
    assert metrics.effective_resistance(1, 2) == pytest.approx(1.0 / a, abs=1e-12)
    assert metrics.effective_resistance(1, 1) == pytest.approx(0.0, abs=1e-15)

    k3 = WeightedGraph.from_edges(3, [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    m3 = connectivity_metrics(k3)
    assert m3.lambda2 == pytest.approx(3.0, abs=1e-9)
    assert m3.lambda_n == pytest.approx(3.0, abs=1e-9)
    assert m3.max_degree == pytest.approx(2.0)
    for i in range(1, 4):
        for j in range(i + 1, 4):
            assert m3.effective_resistance(i, j) == pytest.approx(2 / 3, abs=1e-12)


def test_resistance_symmetry():
    g = random_connected_graph(11)
    metrics = connectivity_metrics(g)
    for i in range(1, g.n + 1):
        assert metrics.effective_resistance(i, i) == pytest.approx(0.0, abs=1e-12)
        for j in range(i + 1, g.n + 1):
            rij = metrics.effective_resistance(i, j)
            assert rij == pytest.approx(metrics.effective_resistance(j, i))
            assert rij > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_spectral_sufficient_and_necessary_sandwich(seed):
    # lambda2 >= ||omega||_{E,inf} forces margin <= 1; margin <= sin(gamma)
    # in turn forces 2 deg(G) >= ||omega||_{E,inf} sin(gamma).
    from syncgrid.sync import sync_margin

    g = random_connected_graph(seed)
    omega = random_zero_mean(seed + 2, g.n)
    bundle = build_laplacian(g)
    spread = edge_infinity_norm(g, omega)
    if spread > 0:
        omega_scaled = omega * (bundle.lambda2 / spread)  # lambda2 == spread now
        margin = sync_margin(g, omega_scaled).margin
        assert margin <= 1.0 + 1e-9
    margin = sync_margin(g, omega).margin
    if margin <= 1.0:
        gamma = math.asin(margin)
        assert 2.0 * np.max(g.weighted_degrees()) >= spread * math.sin(gamma) - 1e-9


def test_connectivity_checks():
    disconnected = WeightedGraph.from_edges(4, [(1, 2, 1.0), (3, 4, 1.0)])
    assert not is_connected(disconnected)
    with pytest.raises(DisconnectedGraphError):
        build_laplacian(disconnected)
    with pytest.raises(DegenerateGraphError):
        build_laplacian(WeightedGraph(1, ()))


def test_graph_validation():
    with pytest.raises(ValueError):
        WeightedGraph(3, ((1, 1, 1.0),))  # self loop
    with pytest.raises(ValueError):
        WeightedGraph(3, ((1, 2, -1.0),))  # negative weight
    with pytest.raises(ValueError):
        WeightedGraph(2, ((1, 2, 1.0), (1, 2, 2.0)))  # duplicate
    with pytest.raises(ValueError):
        WeightedGraph(2, ((2, 1, 1.0),))  # orientation


def test_graph_io_roundtrip(tmp_path):
    g = random_connected_graph(5)
    path = tmp_path / "g.json"
    save_graph(g, str(path))
    loaded = load_graph(str(path))
    assert loaded == g
    assert graph_from_dict(graph_to_dict(g)) == g

    csv_path = tmp_path / "g.csv"
    with open(csv_path, "w") as fh:
        fh.write("i,j,weight\n")
        for i, j, w in g.edges:
            fh.write(f"{i},{j},{w!r}\n")
    assert load_graph(str(csv_path)) == g


def test_edge_differences_orientation():
    g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
    x = np.array([1.0, 4.0, 9.0])
    assert np.allclose(edge_differences(g, x), [3.0, 5.0])
