"""Bulk permutation matrices, cycle consistency and universe factorization.

A bulk permutation over ``n`` graphs of ``m`` vertices is an ``nm x nm`` 0/1 matrix
whose ``(i, j)`` block is the partial permutation matching graph ``i`` to graph
``j``.  It is cycle-consistent when every diagonal block is the identity, the
blocks are transposes of each other (``X_ij = X_ji^T``) and matches compose
(``X_ij X_jl <= X_il`` elementwise).  Equivalently it factors as
``X_ij = X_i X_j^T`` through a shared universe of ``r`` labels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "BulkPermutation",
    "UniverseAssignment",
    "ConsistencyCheck",
    "is_cycle_consistent",
    "expand",
    "recover_universe",
    "membership_Cr",
    "universe_class_count",
]


@dataclass(eq=False)
class BulkPermutation:
    mat: np.ndarray  # (n*m, n*m) int8 0/1
    n: int
    m: int

    def __post_init__(self):
        self.mat = np.asarray(self.mat)
        if self.mat.shape != (self.n * self.m, self.n * self.m):
            raise ValueError(f"expected a ({self.n * self.m}, {self.n * self.m}) matrix, got {self.mat.shape}")

    @classmethod
    def from_matrix(cls, mat, n: int, m: int, validate: bool = True) -> "BulkPermutation":
        mat = np.asarray(mat)
        if not np.all((mat == 0) | (mat == 1)):
            raise ValueError("bulk permutation entries must be 0 or 1")
        bp = cls(mat.astype(np.int8), n, m)
        if validate:
            bp.validate()
        return bp

    @classmethod
    def identity(cls, n: int, m: int) -> "BulkPermutation":
        """Every graph matched to every other by vertex index."""
        return cls(np.tile(np.eye(m, dtype=np.int8), (n, n)), n, m)

    @classmethod
    def from_blocks(cls, blocks) -> "BulkPermutation":
        """Build from an ``n x n`` nested list of ``m x m`` blocks."""
        return cls.from_matrix(np.block([[np.asarray(b) for b in row] for row in blocks]), len(blocks), len(blocks[0][0]))

    def block(self, i: int, j: int) -> np.ndarray:
        m = self.m
        return self.mat[i * m : (i + 1) * m, j * m : (j + 1) * m]

    def blocks4(self) -> np.ndarray:
        """View as an ``(n, n, m, m)`` array of blocks."""
        n, m = self.n, self.m
        return self.mat.reshape(n, m, n, m).transpose(0, 2, 1, 3)

    def validate(self) -> None:
        """Check the block invariants: partial permutations, identity diagonal, symmetry."""
        n, m = self.n, self.m
        b4 = self.blocks4()
        if np.any(b4.sum(axis=3) > 1) or np.any(b4.sum(axis=2) > 1):
            raise ValueError("a block is not a partial permutation (row or column sum > 1)")
        eye = np.eye(m, dtype=self.mat.dtype)
        for i in range(n):
            if not np.array_equal(b4[i, i], eye):
                raise ValueError(f"diagonal block ({i}, {i}) is not the identity")
        if not np.array_equal(self.mat, self.mat.T):
            i, j = np.argwhere(self.mat != self.mat.T)[0] // m
            raise ValueError(f"block ({i}, {j}) is not the transpose of block ({j}, {i})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, BulkPermutation):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and np.array_equal(self.mat, other.mat)

    def __repr__(self) -> str:
        return f"BulkPermutation(n={self.n}, m={self.m}, matches={int(self.mat.sum()) - self.n * self.m})"


@dataclass(eq=False)
class UniverseAssignment:
    """One ``m x r`` 0/1 matrix per graph sending each vertex to a universe label."""

    assigns: list
    r: int

    def __post_init__(self):
        self.assigns = [np.asarray(a, dtype=np.int8) for a in self.assigns]
        if not self.assigns:
            raise ValueError("universe assignment needs at least one graph")
        m = self.assigns[0].shape[0]
        for k, a in enumerate(self.assigns):
            if a.shape != (m, self.r):
                raise ValueError(f"assignment {k} has shape {a.shape}, expected ({m}, {self.r})")
            if not np.all((a == 0) | (a == 1)):
                raise ValueError(f"assignment {k} is not 0/1")
            if not np.all(a.sum(axis=1) == 1):
                raise ValueError(f"assignment {k}: every vertex needs exactly one universe label")
            if np.any(a.sum(axis=0) > 1):
                raise ValueError(f"assignment {k}: a universe label is used twice within one graph")

    @property
    def n(self) -> int:
        return len(self.assigns)

    @property
    def m(self) -> int:
        return self.assigns[0].shape[0]

    @classmethod
    def from_labels(cls, labels, r: int | None = None) -> "UniverseAssignment":
        """Build from an ``(n, m)`` integer array of universe labels."""
        labels = np.asarray(labels, dtype=np.int64)
        r = int(labels.max()) + 1 if r is None else r
        eye = np.eye(r, dtype=np.int8)
        return cls([eye[row] for row in labels], r)

    def labels(self) -> np.ndarray:
        return np.stack([a.argmax(axis=1) for a in self.assigns])

    def used_labels(self) -> int:
        return int(np.count_nonzero(np.any(np.stack(self.assigns).sum(axis=0), axis=0)))


def expand(u: UniverseAssignment) -> BulkPermutation:
    """Bulk matrix with blocks ``X_i X_j^T``."""
    a = np.vstack(u.assigns).astype(np.int64)
    return BulkPermutation((a @ a.T).astype(np.int8), u.n, u.m)


@dataclass
class ConsistencyCheck:
    consistent: bool
    rule: str | None = None  # "identity", "symmetry", "partial-permutation" or "transitivity"
    triple: tuple | None = None  # offending graph indices (i, j, l)

    def __bool__(self) -> bool:
        return self.consistent

    def describe(self) -> str:
        if self.consistent:
            return "consistent"
        return f"{self.rule} violated at graphs {self.triple}"


def is_cycle_consistent(x: BulkPermutation, sample: int | None = None, seed: int = 0) -> ConsistencyCheck:
    """Check identity, symmetry and transitivity of all pairwise blocks.

    Transitivity is tested on all ``n^3`` ordered triples, or on ``sample`` random
    triples when given.  The first violated triple in lexicographic order is reported.
    """
    n, m = x.n, x.m
    mat = np.asarray(x.mat)
    if not np.all((mat == 0) | (mat == 1)):
        raise ValueError("bulk permutation entries must be 0 or 1")
    mat = mat.astype(np.int64)
    b4 = mat.reshape(n, m, n, m).transpose(0, 2, 1, 3)
    over = (b4.sum(axis=3) > 1).any(axis=2) | (b4.sum(axis=2) > 1).any(axis=2)
    if over.any():
        i, j = np.argwhere(over)[0]
        return ConsistencyCheck(False, "partial-permutation", (int(i), int(j), int(j)))
    eye = np.eye(m, dtype=np.int64)
    for i in range(n):
        if not np.array_equal(b4[i, i], eye):
            return ConsistencyCheck(False, "identity", (i, i, i))
    asym = (b4 != b4.transpose(1, 0, 3, 2)).any(axis=(2, 3))
    if asym.any():
        i, j = np.argwhere(asym)[0]
        return ConsistencyCheck(False, "symmetry", (int(i), int(j), int(i)))

    if sample is not None:
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, n, size=(sample, 3))
        bad = [
            tuple(int(t) for t in (i, j, l))
            for i, j, l in triples
            if np.any(b4[i, j] @ b4[j, l] > b4[i, l])
        ]
        if bad:
            return ConsistencyCheck(False, "transitivity", min(bad))
        return ConsistencyCheck(True)

    viol = np.zeros((n, n, n), dtype=bool)  # (i, j, l)
    mat = mat.astype(np.float64)  # exact for 0/1 products, and uses BLAS
    for j in range(n):
        through = mat[:, j * m : (j + 1) * m] @ mat[j * m : (j + 1) * m, :]
        viol[:, j, :] = (through > mat).reshape(n, m, n, m).any(axis=(1, 3))
    if viol.any():
        return ConsistencyCheck(False, "transitivity", tuple(int(t) for t in np.argwhere(viol)[0]))
    return ConsistencyCheck(True)


def _match_classes(x: BulkPermutation) -> np.ndarray:
    """Label every bulk vertex by its connected class under the match relation,
    classes numbered in order of their smallest member."""
    _, raw = connected_components(csr_matrix(np.asarray(x.mat, dtype=np.int8)), directed=False)
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return relabel[raw]


def universe_class_count(x: BulkPermutation) -> int:
    return int(_match_classes(x).max()) + 1


def recover_universe(x: BulkPermutation) -> UniverseAssignment:
    """Factor a cycle-consistent bulk matrix through its match classes."""
    check = is_cycle_consistent(x)
    if not check:
        raise ValueError(f"cannot factor an inconsistent bulk matrix: {check.describe()}")
    labels = _match_classes(x).reshape(x.n, x.m)
    return UniverseAssignment.from_labels(labels)


def membership_Cr(x: BulkPermutation, r: int) -> bool:
    """True iff ``x`` is cycle-consistent and factors through at most ``r`` universe labels."""
    if not is_cycle_consistent(x):
        return False
    return universe_class_count(x) <= r
