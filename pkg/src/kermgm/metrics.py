"""Precision, recall and F1 between bulk permutation matrices.

Only off-diagonal matches count: with ``I`` the ``nm x nm`` identity,

    precision = <X_true - I, X - I> / ||X - I||_F^2
    recall    = <X_true - I, X - I> / ||X_true - I||_F^2

A ratio with a zero denominator is 0, except that two match-free matrices agree
perfectly (all scores 1).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .consistency import BulkPermutation

__all__ = ["Scores", "score", "strip_dummy_matches"]


class Scores(NamedTuple):
    precision: float
    recall: float
    f1: float


def _off_identity(x) -> np.ndarray:
    mat = np.asarray(x.mat if isinstance(x, BulkPermutation) else x, dtype=np.int64)
    return mat - np.eye(mat.shape[0], dtype=np.int64)


def score(x, truth) -> Scores:
    a, b = _off_identity(x), _off_identity(truth)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    common = int(np.vdot(b, a))
    est, true = int(np.vdot(a, a)), int(np.vdot(b, b))
    if est == 0 and true == 0:
        return Scores(1.0, 1.0, 1.0)
    precision = common / est if est else 0.0
    recall = common / true if true else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return Scores(precision, recall, f1)


def strip_dummy_matches(x: BulkPermutation, c) -> BulkPermutation:
    """Drop every match that involves a dummy vertex (diagonal blocks are kept)."""
    dummy = np.asarray(c.dummy_mask if hasattr(c, "dummy_mask") else c, dtype=bool)
    n, m = x.n, x.m
    mat = x.mat.copy()
    mat[dummy, :] = 0
    mat[:, dummy] = 0
    for i in range(n):
        mat[i * m : (i + 1) * m, i * m : (i + 1) * m] = x.block(i, i)
    return BulkPermutation(mat, n, m)
