import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kermgm.consistency import BulkPermutation
from kermgm.graphs import (
    AttributedGraph,
    DatasetError,
    GraphCollection,
    collection_to_dict,
    default_dummy_attr,
    load_collection,
    make_collection,
    pad_with_dummies,
    save_collection,
    strip_dummies,
)
from oracles import random_collection


def small_graph(rng, k=3, d_v=2, d_e=3):
    edges = [(0, 1), (1, 2)][: max(0, k - 1)]
    return AttributedGraph(rng.random((k, d_v)), edges, rng.random((len(edges), d_e)))


def test_pad_noop_when_full():
    g = small_graph(np.random.default_rng(0))
    assert pad_with_dummies(g, 3, np.zeros(2)) == g


def test_pad_appends_unconnected_dummies():
    rng = np.random.default_rng(1)
    g = small_graph(rng, k=2)
    p = pad_with_dummies(g, 4, np.array([9.0, 9.0]))
    assert p.num_vertices == 4
    assert p.is_dummy.tolist() == [False, False, True, True]
    np.testing.assert_array_equal(p.edges, g.edges)
    np.testing.assert_array_equal(p.vertex_attrs[2:], 9.0)
    np.testing.assert_array_equal(p.vertex_attrs[:2], g.vertex_attrs)


def test_pad_too_small_target():
    with pytest.raises(DatasetError):
        pad_with_dummies(small_graph(np.random.default_rng(2)), 2, np.zeros(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 5), st.integers(0, 2**16))
def test_pad_strip_round_trip(k, extra, seed):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(k, 1)
    keep = rng.random(len(iu)) < 0.5
    edges = np.stack([iu[keep], ju[keep]], 1)
    g = AttributedGraph(rng.random((k, 2)), edges, rng.random((len(edges), 2)))
    p = pad_with_dummies(g, k + extra, rng.random(2) + 5)
    assert strip_dummies(p) == g
    assert strip_dummies(p, k) == g
    assert not p.is_dummy[p.edges.ravel()].any()
    np.testing.assert_array_equal(p.adjacency()[:k, :k], g.adjacency())


def test_dummy_with_edge_rejected():
    with pytest.raises(DatasetError):
        AttributedGraph(np.zeros((2, 1)), [(0, 1)], np.zeros((1, 1)), [False, True])


def test_bad_edge_endpoint_rejected():
    with pytest.raises(DatasetError):
        AttributedGraph(np.zeros((2, 1)), [(0, 2)], np.zeros((1, 1)))


def test_default_dummy_attr_is_far():
    rng = np.random.default_rng(3)
    gs = [small_graph(rng) for _ in range(3)]
    top = max(np.abs(g.vertex_attrs).max() for g in gs)
    np.testing.assert_allclose(default_dummy_attr(gs), np.full(2, 10 * top))
    np.testing.assert_allclose(default_dummy_attr(gs, scale=3), np.full(2, 3 * top))


def test_make_collection_pads_to_largest():
    rng = np.random.default_rng(4)
    c = make_collection([small_graph(rng, 2), small_graph(rng, 3)])
    assert (c.n, c.m) == (2, 3)
    assert c.dummy_mask.tolist() == [False, False, True, False, False, False]


def test_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    c = random_collection(rng, 3, 4, d_v=2, d_e=3)
    c.ground_truth = BulkPermutation.identity(3, 4)
    path = tmp_path / "set.json"
    save_collection(c, path)
    back = load_collection(path)
    assert all(a == b for a, b in zip(c.graphs, back.graphs))
    assert back.ground_truth == c.ground_truth
    assert (back.n, back.m, back.d_v, back.d_e) == (3, 4, 2, 3)


def test_round_trip_with_dummies(tmp_path):
    rng = np.random.default_rng(6)
    c = make_collection([small_graph(rng, 1), small_graph(rng, 3)])
    save_collection(c, tmp_path / "d.json")
    back = load_collection(tmp_path / "d.json")
    assert all(a == b for a, b in zip(c.graphs, back.graphs))


def _doc(tmp_path):
    c = random_collection(np.random.default_rng(7), 2, 3)
    return collection_to_dict(c)


def test_mismatched_vertex_dims_rejected(tmp_path):
    doc = _doc(tmp_path)
    doc["graphs"][1]["vertex_attrs"] = [[0.0, 1.0, 2.0]] * 3
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    with pytest.raises(DatasetError, match="vertex_attrs"):
        load_collection(tmp_path / "bad.json")


def test_empty_collection_rejected(tmp_path):
    doc = _doc(tmp_path)
    doc["n"], doc["graphs"] = 0, []
    (tmp_path / "empty.json").write_text(json.dumps(doc))
    with pytest.raises(DatasetError):
        load_collection(tmp_path / "empty.json")
    with pytest.raises(DatasetError):
        GraphCollection([])


def test_missing_field_named(tmp_path):
    doc = _doc(tmp_path)
    del doc["graphs"][0]["dummy_mask"]
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(DatasetError, match="dummy_mask"):
        load_collection(tmp_path / "m.json")


def test_syntax_error_names_line(tmp_path):
    (tmp_path / "s.json").write_text('{\n  "n": 2,\n  "m": oops\n}\n')
    with pytest.raises(DatasetError, match="line 3"):
        load_collection(tmp_path / "s.json")


def test_invalid_ground_truth_rejected(tmp_path):
    doc = _doc(tmp_path)
    doc["ground_truth"] = np.zeros((6, 6), dtype=int).tolist()
    (tmp_path / "g.json").write_text(json.dumps(doc))
    with pytest.raises(DatasetError, match="ground_truth"):
        load_collection(tmp_path / "g.json")
