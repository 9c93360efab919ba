import numpy as np
import pytest

from kermgm import harray
from kermgm.affinity import EXPLICIT_SIZE_LIMIT, build_phi, build_vertex_affinity, explicit_edge_affinity
from kermgm.graphs import AttributedGraph, GraphCollection
from kermgm.kernels import KernelSpec, rff_map
from oracles import edge_affinity_loops, edge_term_loops, random_collection, vec

LIN = KernelSpec("linear")


def test_vertex_affinity_hand_example():
    g1 = AttributedGraph(np.array([[1.0], [2.0]]), np.zeros((0, 2)), np.zeros((0, 1)))
    g2 = AttributedGraph(np.array([[3.0], [4.0]]), np.zeros((0, 2)), np.zeros((0, 1)))
    kv = build_vertex_affinity(GraphCollection([g1, g2]), LIN)
    np.testing.assert_array_equal(kv.mat[:2, 2:], [[3, 4], [6, 8]])
    np.testing.assert_array_equal(kv.mat[2:, :2], [[3, 6], [4, 8]])
    np.testing.assert_array_equal(kv.mat, kv.mat.T)


def test_vertex_affinity_single_graph():
    c = random_collection(np.random.default_rng(0), 1, 5)
    a = c.graphs[0].vertex_attrs
    np.testing.assert_allclose(build_vertex_affinity(c, LIN).mat, a @ a.T)


def test_identical_graphs_identical_blocks():
    g = random_collection(np.random.default_rng(1), 1, 4).graphs[0]
    kv = build_vertex_affinity(GraphCollection([g, g.copy(), g.copy()]), KernelSpec("gaussian", gamma=0.7)).mat
    for i in range(3):
        for j in range(3):
            np.testing.assert_array_equal(kv[4 * i : 4 * i + 4, 4 * j : 4 * j + 4], kv[:4, :4])


def test_phi_edgeless_is_zero():
    g = AttributedGraph(np.ones((3, 2)), np.zeros((0, 2)), np.zeros((0, 4)))
    phi = build_phi(GraphCollection([g, g.copy()]), LIN)
    assert not phi.arr.any()


def test_phi_single_edge_mirrored():
    v = np.array([0.5, -2.0, 3.0])
    g = AttributedGraph(np.ones((3, 1)), [(0, 1)], v[None, :])
    arr = build_phi(GraphCollection([g]), LIN).arr
    assert np.count_nonzero(np.any(arr != 0, axis=0)) == 2
    np.testing.assert_array_equal(arr[:, 0, 1], v)
    np.testing.assert_array_equal(arr[:, 1, 0], v)


def test_phi_block_diagonal_and_zero_off_edges():
    c = random_collection(np.random.default_rng(2), 3, 4, p=0.5)
    phi = build_phi(c, LIN)
    for i in range(3):
        for j in range(3):
            blk = phi.arr[:, 4 * i : 4 * i + 4, 4 * j : 4 * j + 4]
            if i != j:
                assert not blk.any()
            else:
                nonzero = np.any(blk != 0, axis=0)
                assert np.array_equal(nonzero, c.graphs[i].adjacency().astype(bool))
    assert phi.symmetric
    np.testing.assert_array_equal(harray.transpose3(phi.arr), phi.arr)


def test_phi_gaussian_uses_rff():
    c = random_collection(np.random.default_rng(3), 2, 3, p=1.0)
    spec = KernelSpec("gaussian", gamma=0.2, rff_dim=16, seed=5)
    phi = build_phi(c, spec)
    assert phi.dim == 16
    g = c.graphs[1]
    a, b = g.edges[0]
    np.testing.assert_allclose(phi.arr[:, 3 + a, 3 + b], rff_map(spec, g.edge_attrs[0]))


def test_explicit_affinity_zero_phi():
    g = AttributedGraph(np.ones((3, 1)), np.zeros((0, 2)), np.zeros((0, 1)))
    assert not explicit_edge_affinity(GraphCollection([g, g.copy()]), LIN).any()


def test_explicit_affinity_matches_loop_oracle():
    c = random_collection(np.random.default_rng(4), 2, 3, d_e=2, p=0.6)
    phi = build_phi(c, LIN)
    np.testing.assert_allclose(explicit_edge_affinity(c, LIN, phi), edge_affinity_loops(phi.arr), atol=1e-14)


def test_explicit_affinity_single_edge_pattern():
    # graph 0: edge (0,1) valued 2; graph 1: edge (0,1) valued 3; bulk size N = 4
    g0 = AttributedGraph(np.ones((2, 1)), [(0, 1)], [[2.0]])
    g1 = AttributedGraph(np.ones((2, 1)), [(0, 1)], [[3.0]])
    ke = explicit_edge_affinity(GraphCollection([g0, g1]), LIN)
    fibers = {(0, 1): 2.0, (1, 0): 2.0, (2, 3): 3.0, (3, 2): 3.0}
    expected = np.zeros((16, 16))
    for (a, k), fa in fibers.items():
        for (c, b), fc in fibers.items():
            expected[b * 4 + k, c * 4 + a] += fa * fc
    expected = 0.5 * (expected + expected.T)
    assert np.count_nonzero(expected) == 16  # every raw position is its own mirror here
    np.testing.assert_array_equal(ke != 0, expected != 0)
    np.testing.assert_allclose(ke, expected)


def test_explicit_affinity_size_guard():
    c = random_collection(np.random.default_rng(5), 3, 5)
    assert c.n * c.m > EXPLICIT_SIZE_LIMIT
    with pytest.raises(MemoryError):
        explicit_edge_affinity(c, LIN)


def test_factorized_form_equals_quadratic_form():
    rng = np.random.default_rng(6)
    for _ in range(5):
        c = random_collection(rng, 2, 3, d_e=2, p=0.7)
        phi = build_phi(c, LIN)
        ke = explicit_edge_affinity(c, LIN, phi)
        for _ in range(5):
            x = rng.normal(size=(6, 6))
            compact = harray.inner3(harray.dot_right(phi.arr, x), harray.dot_left(x, phi.arr))
            assert compact == pytest.approx(vec(x) @ ke @ vec(x), rel=1e-9, abs=1e-9)
            assert compact == pytest.approx(edge_term_loops(phi.arr, x), rel=1e-9, abs=1e-9)
