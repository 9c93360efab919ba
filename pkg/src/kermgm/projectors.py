"""Projection of a real bulk matrix onto bulk permutations.

All projectors share the same spectral embedding: the ``r`` algebraically largest
eigenpairs of the symmetrized input, with eigenvectors scaled by
``sqrt(max(lambda, 0))``.  Row block ``U_i`` of that embedding describes graph ``i``.

* :func:`match_eig` solves one assignment per pair on ``U_i U_j^T``.
* :func:`gpow` repeats ``match_eig`` on ``x @ Z`` until the estimate stops moving.
* :func:`msync` aligns every graph to graph 0 and expands, so the result is
  always cycle-consistent.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from numba import njit

from .consistency import BulkPermutation, UniverseAssignment, expand

__all__ = [
    "ProjectorSpec",
    "ProjectionNotConverged",
    "hungarian",
    "spectral_embedding",
    "match_eig",
    "gpow",
    "gpow_run",
    "msync",
    "project",
    "PROJECTORS",
]

PROJECTORS = ("matcheig", "gpow", "msync")


class ProjectionNotConverged(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ProjectorSpec:
    kind: str = "matcheig"
    rank: int = 1
    tol: float = 1e-3
    max_iter: int = 100

    def __post_init__(self):
        if self.kind not in PROJECTORS:
            raise ValueError(f"unknown projector '{self.kind}', expected one of {PROJECTORS}")
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if not self.tol > 0:
            raise ValueError(f"projector tolerance must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"projector max_iter must be >= 1, got {self.max_iter}")


# -- linear assignment ------------------------------------------------------------


@njit(cache=True)
def _lap_min(cost):
    """Shortest augmenting path Hungarian method (minimization).

    Returns the row -> column assignment and dual potentials ``u, v`` with
    ``cost[i, j] - u[i] - v[j] >= 0``, tight on the assignment.
    """
    m = cost.shape[0]
    inf = np.inf
    u = np.zeros(m + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)  # column -> row, 1-based, 0 = free
    way = np.zeros(m + 1, dtype=np.int64)
    minv = np.empty(m + 1)
    used = np.empty(m + 1, dtype=np.bool_)
    for i in range(1, m + 1):
        p[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    cols = np.empty(m, dtype=np.int64)
    for j in range(1, m + 1):
        cols[p[j] - 1] = j - 1
    return cols, u[1:].copy(), v[1:].copy()


@njit(cache=True)
def _lexmin_perfect_matching(tight, cols):
    """Lexicographically smallest perfect matching inside the boolean bipartite
    graph ``tight``, starting from its perfect matching ``cols``."""
    m = tight.shape[0]
    r2c = cols.copy()
    c2r = np.empty(m, dtype=np.int64)
    for i in range(m):
        c2r[r2c[i]] = i
    fixed = np.zeros(m, dtype=np.bool_)
    parent = np.empty(m, dtype=np.int64)
    seen = np.empty(m, dtype=np.bool_)
    queue = np.empty(m, dtype=np.int64)
    for i in range(m):
        for j in range(m):
            if not tight[i, j] or fixed[j]:
                continue
            if j == r2c[i]:
                break
            # row i takes column j: the row holding j must reach the freed
            # column r2c[i] along an alternating path avoiding fixed columns
            old = r2c[i]
            k = c2r[j]
            seen[:] = False
            seen[j] = True
            queue[0] = k
            head, tail = 0, 1
            found = False
            while head < tail and not found:
                q = queue[head]
                head += 1
                for c in range(m):
                    if tight[q, c] and not fixed[c] and not seen[c]:
                        seen[c] = True
                        parent[c] = q
                        if c == old:
                            found = True
                            break
                        queue[tail] = c2r[c]
                        tail += 1
            if found:
                c = old
                while True:
                    q = parent[c]
                    nxt = r2c[q]
                    r2c[q] = c
                    c2r[c] = q
                    if q == k:
                        break
                    c = nxt
                r2c[i] = j
                c2r[j] = i
                break
        fixed[r2c[i]] = True
    return r2c


def hungarian(score, maximize: bool = True) -> np.ndarray:
    """Optimal assignment of a square matrix, returned as a 0/1 permutation matrix.

    Among several optimal assignments the lexicographically smallest one (column
    index of row 0, then row 1, ...) is returned.
    """
    score = np.asarray(score, dtype=np.float64)
    if score.ndim != 2 or score.shape[0] != score.shape[1]:
        raise ValueError(f"assignment needs a square matrix, got shape {score.shape}")
    if not np.all(np.isfinite(score)):
        raise ValueError("assignment matrix has non-finite entries")
    m = score.shape[0]
    cost = np.ascontiguousarray(-score if maximize else score)
    cols, u, v = _lap_min(cost)
    tol = 64 * np.finfo(float).eps * max(1.0, np.abs(cost).max()) * m
    tight = (cost - u[:, None] - v[None, :]) <= tol
    if np.count_nonzero(tight) > m:
        lex = _lexmin_perfect_matching(tight, cols)
        rows = np.arange(m)
        if cost[rows, lex].sum() <= cost[rows, cols].sum() + tol:
            cols = lex
    out = np.zeros((m, m), dtype=np.int8)
    out[np.arange(m), cols] = 1
    return out


# -- spectral projectors ----------------------------------------------------------


def _prepare(x, n: int | None, m: int | None, r: int) -> tuple[np.ndarray, int, int]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square bulk matrix, got shape {x.shape}")
    size = x.shape[0]
    if n is None and m is None:
        raise ValueError("give n or m to split the bulk matrix into blocks")
    n = size // m if n is None else n
    m = size // n if m is None else m
    if n * m != size:
        raise ValueError(f"bulk matrix of size {size} does not split into {n} blocks of {m}")
    if not 1 <= r <= size:
        raise ValueError(f"rank must be in [1, {size}], got {r}")
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("bulk matrix has non-finite entries")
    return x, n, m


def spectral_embedding(x: np.ndarray, r: int) -> np.ndarray:
    """``U sqrt(max(Lambda, 0))`` for the ``r`` largest eigenvalues of ``(x + x^T) / 2``."""
    sym = 0.5 * (x + x.T)
    size = sym.shape[0]
    try:
        w, vecs = eigh(sym, subset_by_index=[size - r, size - 1])
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError(f"eigendecomposition failed: {exc}") from None
    return vecs * np.sqrt(np.maximum(w, 0.0))


def _match_eig_embedded(emb: np.ndarray, n: int, m: int) -> BulkPermutation:
    out = np.zeros((n * m, n * m), dtype=np.int8)
    eye = np.eye(m, dtype=np.int8)
    blocks = [emb[i * m : (i + 1) * m] for i in range(n)]
    for i in range(n):
        out[i * m : (i + 1) * m, i * m : (i + 1) * m] = eye
        for j in range(i + 1, n):
            p = hungarian(blocks[i] @ blocks[j].T)
            out[i * m : (i + 1) * m, j * m : (j + 1) * m] = p
            out[j * m : (j + 1) * m, i * m : (i + 1) * m] = p.T
    return BulkPermutation(out, n, m)


def match_eig(x, r: int, n: int | None = None, m: int | None = None) -> BulkPermutation:
    """Pairwise assignments on the rank-``r`` spectral embedding of ``x``.

    The result need not be cycle-consistent.
    """
    x, n, m = _prepare(x, n, m, r)
    return _match_eig_embedded(spectral_embedding(x, r), n, m)


def gpow_run(x, spec: ProjectorSpec, n: int | None = None, m: int | None = None):
    """Generalized power iterations; returns ``(estimate, iterations, converged)``."""
    x, n, m = _prepare(x, n, m, spec.rank)
    z = match_eig(x, spec.rank, n, m)
    for it in range(1, spec.max_iter + 1):
        z_new = match_eig(x @ z.mat, spec.rank, n, m)
        delta = np.linalg.norm(z_new.mat.astype(np.float64) - z.mat)
        z = z_new
        if delta < spec.tol:
            return z, it, True
    return z, spec.max_iter, False


def gpow(x, spec: ProjectorSpec, n: int | None = None, m: int | None = None) -> BulkPermutation:
    z, iters, converged = gpow_run(x, spec, n, m)
    if not converged:
        warnings.warn(f"gpow stopped after {iters} iterations without converging", ProjectionNotConverged, stacklevel=2)
    return z


def msync(x, r: int, n: int | None = None, m: int | None = None) -> BulkPermutation:
    """Align every graph to graph 0 through the spectral embedding, then expand."""
    x, n, m = _prepare(x, n, m, r)
    emb = spectral_embedding(x, r)
    ref = emb[:m]
    assigns = [hungarian(emb[i * m : (i + 1) * m] @ ref.T) for i in range(n)]
    assigns[0] = np.eye(m, dtype=np.int8)
    return expand(UniverseAssignment(assigns, m))


def project(x, spec: ProjectorSpec, n: int | None = None, m: int | None = None) -> BulkPermutation:
    """Dispatch to the projector named by ``spec.kind``."""
    if spec.kind == "matcheig":
        return match_eig(x, spec.rank, n, m)
    if spec.kind == "gpow":
        return gpow(x, spec, n, m)
    return msync(x, spec.rank, n, m)
