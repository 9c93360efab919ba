"""Independent reference implementations used by the test-suite.

Everything here is written with explicit loops or exhaustive enumeration and
shares no code with the package beyond its data types.
"""
from __future__ import annotations

import itertools

import numpy as np

from kermgm.consistency import BulkPermutation, UniverseAssignment, expand
from kermgm.graphs import AttributedGraph, GraphCollection


# -- 3d array algebra -----------------------------------------------------------


def star_loops(a, b):
    d, m, _ = a.shape
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                for l in range(d):
                    out[i, j] += a[l, i, k] * b[l, k, j]
    return out


def dot_right_loops(a, x):
    d, m, _ = a.shape
    out = np.zeros_like(a, dtype=float)
    for l in range(d):
        for i in range(m):
            for j in range(m):
                out[l, i, j] = sum(a[l, i, k] * x[k, j] for k in range(m))
    return out


def dot_left_loops(x, a):
    d, m, _ = a.shape
    out = np.zeros_like(a, dtype=float)
    for l in range(d):
        for i in range(m):
            for j in range(m):
                out[l, i, j] = sum(x[i, k] * a[l, k, j] for k in range(m))
    return out


def edge_term_loops(phi, x):
    """<Phi . X, X . Phi> written out entry by entry."""
    return float(np.sum(dot_right_loops(phi, x) * dot_left_loops(x, phi)))


def rel_err(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


# -- assignment -----------------------------------------------------------------


def assignment_value(score, cols):
    return sum(score[i, c] for i, c in enumerate(cols))


def brute_force_assignment(score):
    """Maximum value and the lexicographically smallest maximizer."""
    m = score.shape[0]
    best, arg = -np.inf, None
    for perm in itertools.permutations(range(m)):  # generated in lexicographic order
        v = assignment_value(score, perm)
        if v > best:
            best, arg = v, perm
    return best, arg


def perm_matrix(cols):
    m = len(cols)
    p = np.zeros((m, m), dtype=np.int8)
    p[np.arange(m), list(cols)] = 1
    return p


# -- edge affinity --------------------------------------------------------------


def edge_affinity_loops(phi):
    """K^e from the Phi fibers: the edge (a, k) of X[k, b]-space paired with (c, b).

    With column-major vec (index of X[k, b] is b*N + k),
    <Phi . X, X . Phi> = sum_{a,b,c,k} <Phi[:, a, k], Phi[:, c, b]> X[k, b] X[a, c].
    """
    _, size, _ = phi.shape
    ke = np.zeros((size * size, size * size))
    nz = [(a, k) for a in range(size) for k in range(size) if np.any(phi[:, a, k])]
    for a, k in nz:
        for c, b in nz:
            ke[b * size + k, c * size + a] += float(phi[:, a, k] @ phi[:, c, b])
    return 0.5 * (ke + ke.T)


def vec(x):
    return np.asarray(x, dtype=float).reshape(-1, order="F")


# -- random instances -----------------------------------------------------------


def random_universe(rng, n, m, r):
    """Each graph gets ``m`` distinct labels out of ``r``."""
    labels = np.stack([rng.choice(r, size=m, replace=False) for _ in range(n)])
    return UniverseAssignment.from_labels(labels, r)


def random_collection(rng, n, m, d_v=2, d_e=2, p=0.5):
    graphs = []
    for _ in range(n):
        iu, ju = np.triu_indices(m, k=1)
        keep = rng.random(len(iu)) < p
        edges = np.stack([iu[keep], ju[keep]], axis=1)
        graphs.append(AttributedGraph(rng.random((m, d_v)), edges, rng.random((len(edges), d_e))))
    return GraphCollection(graphs)


def consistent_full_bulks(n, m):
    """All cycle-consistent bulk matrices whose blocks are full permutations
    (graph 0 fixed as the universe reference)."""
    perms = [perm_matrix(p) for p in itertools.permutations(range(m))]
    eye = np.eye(m, dtype=np.int8)
    for rest in itertools.product(perms, repeat=n - 1):
        yield expand(UniverseAssignment([eye, *rest], m))


def objective_loops(x: BulkPermutation, kv, phi):
    xm = x.mat.astype(float)
    return edge_term_loops(phi.arr, xm) + float(np.trace(kv.mat @ xm))
