"""Vertex affinity ``K^v`` and the block-diagonal edge feature array ``Phi``.

``Phi`` has shape ``(D, nm, nm)``.  Diagonal block ``k`` holds the feature vector of
every edge of graph ``k`` at both orientations ``(i, j)`` and ``(j, i)``; every other
entry is zero.  The edge part of the objective is then ``<Phi . X, X . Phi>``,
which equals ``vec(X)^T K^e vec(X)`` with column-major ``vec``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphCollection
from .kernels import KernelSpec, edge_features, vertex_gram

__all__ = [
    "BulkVertexAffinity",
    "BulkFeatureArray",
    "build_vertex_affinity",
    "build_phi",
    "explicit_edge_affinity",
    "EXPLICIT_SIZE_LIMIT",
]

EXPLICIT_SIZE_LIMIT = 12


@dataclass
class BulkVertexAffinity:
    mat: np.ndarray  # (n*m, n*m)
    n: int
    m: int


@dataclass
class BulkFeatureArray:
    arr: np.ndarray  # (D, n*m, n*m), nonzero on diagonal blocks only
    n: int
    m: int
    _blocks: np.ndarray = field(default=None, repr=False)
    _symmetric: bool = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.arr.shape[0]

    @property
    def symmetric(self) -> bool:
        """True when every block equals its transpose (undirected graphs)."""
        if self._symmetric is None:
            b = self.blocks
            self._symmetric = bool(np.array_equal(b, b.transpose(0, 1, 3, 2)))
        return self._symmetric

    @property
    def blocks(self) -> np.ndarray:
        """Diagonal blocks stacked as ``(n, D, m, m)``."""
        if self._blocks is None:
            m = self.m
            self._blocks = np.stack(
                [self.arr[:, k * m : (k + 1) * m, k * m : (k + 1) * m] for k in range(self.n)]
            )
        return self._blocks


def build_vertex_affinity(c: GraphCollection, spec: KernelSpec) -> BulkVertexAffinity:
    attrs = np.vstack([g.vertex_attrs for g in c.graphs])
    return BulkVertexAffinity(vertex_gram(spec, attrs, attrs), c.n, c.m)


def build_phi(c: GraphCollection, spec: KernelSpec) -> BulkFeatureArray:
    n, m = c.n, c.m
    feats = [edge_features(spec, g.edge_attrs) if len(g.edges) else None for g in c.graphs]
    if spec.kind == "gaussian":
        dim = spec.rff_dim
    else:
        dim = max([f.shape[1] for f in feats if f is not None] + [c.d_e, 1])
    blocks = np.zeros((n, dim, m, m))
    for k, (g, f) in enumerate(zip(c.graphs, feats)):
        if f is None:
            continue
        i, j = g.edges[:, 0], g.edges[:, 1]
        blocks[k][:, i, j] = f.T
        blocks[k][:, j, i] = f.T
    arr = np.zeros((dim, n * m, n * m))
    for k in range(n):
        arr[:, k * m : (k + 1) * m, k * m : (k + 1) * m] = blocks[k]
    return BulkFeatureArray(arr, n, m, blocks)


def explicit_edge_affinity(c: GraphCollection, spec: KernelSpec, phi: BulkFeatureArray | None = None) -> np.ndarray:
    """Materialize the ``(nm)^2 x (nm)^2`` edge affinity matrix.

    Only for small problems (``nm <= 12``); used to cross-check the factorized form.
    """
    size = c.n * c.m
    if size > EXPLICIT_SIZE_LIMIT:
        raise MemoryError(
            f"explicit edge affinity needs (nm)^4 = {size ** 4} entries; refusing for nm={size} > {EXPLICIT_SIZE_LIMIT}"
        )
    a = (phi if phi is not None else build_phi(c, spec)).arr
    # <Phi.X, X.Phi> = sum X[k,b] X[a,c] <Phi[:,a,k], Phi[:,c,b]>; vec index of X[k,b] is b*N + k
    t = np.einsum("lak,lcb->bkca", a, a)
    ke = t.reshape(size * size, size * size)
    return 0.5 * (ke + ke.T)
