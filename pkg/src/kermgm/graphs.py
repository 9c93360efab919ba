"""Attributed graphs, dummy-vertex padding and the JSON dataset format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "AttributedGraph",
    "GraphCollection",
    "DatasetError",
    "pad_with_dummies",
    "strip_dummies",
    "default_dummy_attr",
    "make_collection",
    "load_collection",
    "save_collection",
    "collection_to_dict",
    "collection_from_dict",
]

SPEC_VERSION = 1


class DatasetError(ValueError):
    """Raised for malformed or inconsistent dataset documents."""


@dataclass
class AttributedGraph:
    """Undirected graph with one attribute vector per vertex and per edge.

    ``edges`` holds ``(i, j)`` pairs, each undirected edge listed once.
    """

    vertex_attrs: np.ndarray  # (num_vertices, d_v)
    edges: np.ndarray  # (num_edges, 2) int
    edge_attrs: np.ndarray  # (num_edges, d_e)
    is_dummy: np.ndarray = None  # (num_vertices,) bool

    def __post_init__(self):
        self.vertex_attrs = np.atleast_2d(np.asarray(self.vertex_attrs, dtype=np.float64))
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        edge_attrs = np.asarray(self.edge_attrs, dtype=np.float64)
        if edge_attrs.ndim == 1 and edge_attrs.size == 0:
            edge_attrs = edge_attrs.reshape(0, 0)
        self.edge_attrs = edge_attrs
        if self.is_dummy is None:
            self.is_dummy = np.zeros(self.num_vertices, dtype=bool)
        self.is_dummy = np.asarray(self.is_dummy, dtype=bool)
        self.validate()

    @property
    def num_vertices(self) -> int:
        return self.vertex_attrs.shape[0]

    @property
    def d_v(self) -> int:
        return self.vertex_attrs.shape[1]

    @property
    def d_e(self) -> int:
        return self.edge_attrs.shape[1] if self.edge_attrs.ndim == 2 else 0

    def validate(self) -> None:
        nv = self.num_vertices
        if self.edge_attrs.ndim != 2 or self.edge_attrs.shape[0] != len(self.edges):
            raise DatasetError(
                f"edge_attrs must have one row per edge ({len(self.edges)}), got shape {self.edge_attrs.shape}"
            )
        if self.is_dummy.shape != (nv,):
            raise DatasetError(f"dummy mask must have length {nv}, got {self.is_dummy.shape}")
        if len(self.edges):
            if self.edges.min() < 0 or self.edges.max() >= nv:
                raise DatasetError("edge endpoint out of range")
            if np.any(self.is_dummy[self.edges.ravel()]):
                raise DatasetError("dummy vertices cannot have incident edges")
        if not (np.all(np.isfinite(self.vertex_attrs)) and np.all(np.isfinite(self.edge_attrs))):
            raise DatasetError("attributes must be finite")

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_vertices, self.num_vertices), dtype=bool)
        if len(self.edges):
            a[self.edges[:, 0], self.edges[:, 1]] = True
            a[self.edges[:, 1], self.edges[:, 0]] = True
        return a

    def copy(self) -> "AttributedGraph":
        return AttributedGraph(
            self.vertex_attrs.copy(), self.edges.copy(), self.edge_attrs.copy(), self.is_dummy.copy()
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            np.array_equal(self.vertex_attrs, other.vertex_attrs)
            and np.array_equal(self.edges, other.edges)
            and self.edge_attrs.shape == other.edge_attrs.shape
            and np.array_equal(self.edge_attrs, other.edge_attrs)
            and np.array_equal(self.is_dummy, other.is_dummy)
        )


def pad_with_dummies(g: AttributedGraph, m: int, dummy_attr) -> AttributedGraph:
    """Append unconnected dummy vertices carrying ``dummy_attr`` until ``g`` has ``m`` vertices."""
    if g.num_vertices > m:
        raise DatasetError(f"graph has {g.num_vertices} vertices, cannot pad to {m}")
    extra = m - g.num_vertices
    if extra == 0:
        return g.copy()
    dummy_attr = np.asarray(dummy_attr, dtype=np.float64).reshape(-1)
    if dummy_attr.shape[0] != g.d_v:
        raise DatasetError(f"dummy attribute has dimension {dummy_attr.shape[0]}, expected {g.d_v}")
    attrs = np.vstack([g.vertex_attrs, np.tile(dummy_attr, (extra, 1))])
    mask = np.concatenate([g.is_dummy, np.ones(extra, dtype=bool)])
    return AttributedGraph(attrs, g.edges.copy(), g.edge_attrs.copy(), mask)


def strip_dummies(g: AttributedGraph, num_original: int | None = None) -> AttributedGraph:
    """Undo :func:`pad_with_dummies`.

    Keeps the first ``num_original`` vertices, or drops the trailing run of dummies
    when ``num_original`` is not given.
    """
    keep = len(g.is_dummy)
    if num_original is not None:
        keep = num_original
    else:
        while keep > 0 and g.is_dummy[keep - 1]:
            keep -= 1
    return AttributedGraph(g.vertex_attrs[:keep].copy(), g.edges.copy(), g.edge_attrs.copy(), g.is_dummy[:keep].copy())


def default_dummy_attr(graphs, scale: float = 10.0) -> np.ndarray:
    """Constant vector ``scale * max|attribute|`` over the non-dummy vertices of ``graphs``."""
    vals = [g.vertex_attrs[~g.is_dummy] for g in graphs]
    vals = [v for v in vals if v.size]
    top = max((np.abs(v).max() for v in vals), default=1.0)
    top = top if top > 0 else 1.0
    return np.full(graphs[0].d_v, scale * top)


@dataclass
class GraphCollection:
    """``n`` graphs sharing the vertex count ``m`` and attribute dimensions."""

    graphs: list
    ground_truth: object = None  # BulkPermutation or None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    @property
    def n(self) -> int:
        return len(self.graphs)

    @property
    def m(self) -> int:
        return self.graphs[0].num_vertices

    @property
    def d_v(self) -> int:
        return self.graphs[0].d_v

    @property
    def d_e(self) -> int:
        dims = [g.d_e for g in self.graphs if len(g.edges)]
        return dims[0] if dims else self.graphs[0].d_e

    @property
    def dummy_mask(self) -> np.ndarray:
        """Bulk ``(n*m,)`` mask of dummy vertices."""
        return np.concatenate([g.is_dummy for g in self.graphs])

    def validate(self) -> None:
        if not self.graphs:
            raise DatasetError("collection must contain at least one graph")
        m, d_v = self.graphs[0].num_vertices, self.graphs[0].d_v
        d_e = None
        for k, g in enumerate(self.graphs):
            if g.num_vertices != m:
                raise DatasetError(f"graph {k} has {g.num_vertices} vertices, expected {m}")
            if g.d_v != d_v:
                raise DatasetError(f"graph {k} has vertex dimension {g.d_v}, expected {d_v}")
            if len(g.edges):
                if d_e is None:
                    d_e = g.d_e
                elif g.d_e != d_e:
                    raise DatasetError(f"graph {k} has edge dimension {g.d_e}, expected {d_e}")
        if self.ground_truth is not None:
            gt = self.ground_truth
            if (gt.n, gt.m) != (self.n, m):
                raise DatasetError(f"ground truth is for n={gt.n}, m={gt.m}; collection has n={self.n}, m={m}")
            gt.validate()


def make_collection(graphs, m: int | None = None, dummy_attr=None, ground_truth=None) -> GraphCollection:
    """Pad ``graphs`` to a common size and wrap them in a collection."""
    if not graphs:
        raise DatasetError("collection must contain at least one graph")
    m = max(g.num_vertices for g in graphs) if m is None else m
    if dummy_attr is None:
        dummy_attr = default_dummy_attr(graphs)
    return GraphCollection([pad_with_dummies(g, m, dummy_attr) for g in graphs], ground_truth)


# -- serialization ----------------------------------------------------------------


def collection_to_dict(c: GraphCollection) -> dict:
    doc = {
        "spec_version": SPEC_VERSION,
        "n": c.n,
        "m": c.m,
        "d_v": c.d_v,
        "d_e": c.d_e,
        "graphs": [
            {
                "vertex_attrs": g.vertex_attrs.tolist(),
                "edges": g.edges.tolist(),
                "edge_attrs": g.edge_attrs.tolist(),
                "dummy_mask": g.is_dummy.astype(int).tolist(),
            }
            for g in c.graphs
        ],
    }
    if c.ground_truth is not None:
        doc["ground_truth"] = c.ground_truth.mat.astype(int).tolist()
    return doc


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise DatasetError(f"{where}: missing field '{key}'")
    return obj[key]


def _matrix_field(rows, where: str, ncols: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DatasetError(f"{where}: not a rectangular numeric array ({exc})") from None
    if arr.size == 0:
        return arr.reshape(0, ncols or 0)
    if arr.ndim != 2:
        raise DatasetError(f"{where}: expected a 2-d array, got {arr.ndim}-d")
    return arr


def collection_from_dict(doc: dict) -> GraphCollection:
    from .consistency import BulkPermutation

    if not isinstance(doc, dict):
        raise DatasetError("dataset document must be a JSON object")
    n = int(_field(doc, "n", "dataset"))
    m = int(_field(doc, "m", "dataset"))
    d_v = int(_field(doc, "d_v", "dataset"))
    d_e = int(_field(doc, "d_e", "dataset"))
    raw = _field(doc, "graphs", "dataset")
    if n < 1 or len(raw) == 0:
        raise DatasetError("dataset: collection must contain at least one graph")
    if len(raw) != n:
        raise DatasetError(f"dataset: n={n} but {len(raw)} graphs present")
    graphs = []
    for k, gd in enumerate(raw):
        where = f"graphs[{k}]"
        va = _matrix_field(_field(gd, "vertex_attrs", where), f"{where}.vertex_attrs", d_v)
        ed = _matrix_field(_field(gd, "edges", where), f"{where}.edges", 2)
        ea = _matrix_field(_field(gd, "edge_attrs", where), f"{where}.edge_attrs", d_e)
        mask = np.asarray(_field(gd, "dummy_mask", where))
        if va.shape != (m, d_v):
            raise DatasetError(f"{where}.vertex_attrs: expected shape ({m}, {d_v}), got {va.shape}")
        if len(ed) and ea.shape[1] != d_e:
            raise DatasetError(f"{where}.edge_attrs: expected dimension {d_e}, got {ea.shape[1]}")
        if ed.size and not np.all(ed == np.round(ed)):
            raise DatasetError(f"{where}.edges: indices must be integers")
        try:
            graphs.append(AttributedGraph(va, ed.astype(np.int64), ea, mask.astype(bool)))
        except DatasetError as exc:
            raise DatasetError(f"{where}: {exc}") from None
    gt = None
    if doc.get("ground_truth") is not None:
        mat = _matrix_field(doc["ground_truth"], "ground_truth")
        try:
            gt = BulkPermutation.from_matrix(mat, n, m)
        except ValueError as exc:
            raise DatasetError(f"ground_truth: {exc}") from None
    return GraphCollection(graphs, gt)


def save_collection(c: GraphCollection, path) -> None:
    Path(path).write_text(json.dumps(collection_to_dict(c)) + "\n")


def load_collection(path) -> GraphCollection:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return collection_from_dict(doc)
