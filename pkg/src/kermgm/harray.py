r"""
Algebra on ``d x m x m`` feature arrays.

A feature array stores one ``d``-dimensional vector per ``(i, j)`` cell, with the
feature axis outermost so every operation below is a batched matrix product over
``d`` contiguous ``m x m`` slices:

* ``transpose3(a)[l, i, j] = a[l, j, i]``
* ``star(a, b)[i, j] = sum_k sum_l a[l, i, k] b[l, k, j]``
* ``dot_right(a, x)[:, i, j] = sum_k a[:, i, k] x[k, j]``
* ``dot_left(x, a)[:, i, j] = sum_k x[i, k] a[:, k, j]``
* ``inner3(a, b) = tr(star(transpose3(a), b))``

With ``d = 1`` every operation is the ordinary matrix operation.
"""
from __future__ import annotations

import numpy as np

__all__ = ["as_array3", "transpose3", "star", "dot_right", "dot_left", "inner3", "frobenius"]


def as_array3(a) -> np.ndarray:
    """Validate and return ``a`` as a float64 ``(d, m, m)`` array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3 or a.shape[1] != a.shape[2] or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a (d, m, m) array with d, m >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("feature array has non-finite entries")
    return a


def _matrix(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m, m):
        raise ValueError(f"expected a ({m}, {m}) matrix, got shape {x.shape}")
    return x


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def transpose3(a) -> np.ndarray:
    a = as_array3(a)
    return np.ascontiguousarray(a.transpose(0, 2, 1))


def star(a, b) -> np.ndarray:
    """Contract two feature arrays into an ``m x m`` matrix (sum of slice products)."""
    a, b = as_array3(a), as_array3(b)
    _same_shape(a, b)
    return np.matmul(a, b).sum(axis=0)


def dot_right(a, x) -> np.ndarray:
    a = as_array3(a)
    return np.matmul(a, _matrix(x, a.shape[1]))


def dot_left(x, a) -> np.ndarray:
    a = as_array3(a)
    return np.matmul(_matrix(x, a.shape[1]), a)


def inner3(a, b) -> float:
    """Trace inner product; equal to the Frobenius inner product of the raw arrays."""
    a, b = as_array3(a), as_array3(b)
    _same_shape(a, b)
    return float(np.vdot(a, b))


def frobenius(x, y) -> float:
    """Frobenius inner product of two matrices."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    _same_shape(x, y)
    return float(np.vdot(x, y))
