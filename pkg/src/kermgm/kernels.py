"""Vertex kernels and edge feature maps.

The Gaussian kernel is ``exp(-gamma * ||x - y||^2)``; a variance-style bandwidth
``sigma^2`` converts as ``gamma = 1 / (2 * sigma^2)``.  On edges it is approximated
by random Fourier features ``sqrt(2 / D) * cos(W x + b)`` with
``W ~ N(0, 2 * gamma)`` entrywise and ``b ~ U[0, 2 pi)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = ["KernelSpec", "UnsupportedKernelError", "vertex_gram", "rff_map", "edge_features", "gamma_from_variance"]

KINDS = ("linear", "gaussian")
DEFAULT_RFF_DIM = 100


class UnsupportedKernelError(ValueError):
    pass


def gamma_from_variance(variance: float) -> float:
    return 1.0 / (2.0 * variance)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    gamma: float = 1.0
    rff_dim: int = DEFAULT_RFF_DIM
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKernelError(f"unknown kernel '{self.kind}', expected one of {KINDS}")
        if self.kind == "gaussian" and not self.gamma > 0:
            raise ValueError(f"gaussian kernel needs gamma > 0, got {self.gamma}")
        if self.rff_dim < 1:
            raise ValueError(f"rff_dim must be >= 1, got {self.rff_dim}")

    def rff_params(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies ``W`` (D x dim) and phases ``b`` (D,), fixed by the seed."""
        return _rff_params(self.gamma, self.rff_dim, self.seed, dim)


_RFF_CACHE: dict = {}


def _rff_params(gamma: float, rff_dim: int, seed: int, dim: int):
    key = (gamma, rff_dim, seed, dim)
    if key not in _RFF_CACHE:
        rng = np.random.default_rng(seed)
        w = rng.normal(0.0, np.sqrt(2.0 * gamma), size=(rff_dim, dim))
        b = rng.uniform(0.0, 2.0 * np.pi, size=rff_dim)
        w.setflags(write=False)
        b.setflags(write=False)
        _RFF_CACHE[key] = (w, b)
    return _RFF_CACHE[key]


def _as_rows(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(1, -1) if a.ndim == 1 else a


def vertex_gram(spec: KernelSpec, a, b) -> np.ndarray:
    """Kernel matrix between the rows of ``a`` and the rows of ``b``."""
    a, b = _as_rows(a), _as_rows(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"attribute dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if spec.kind == "linear":
        return a @ b.T
    return np.exp(-spec.gamma * cdist(a, b, "sqeuclidean"))


def rff_map(spec: KernelSpec, x) -> np.ndarray:
    """Random Fourier features of one vector (or of each row of a matrix)."""
    if spec.kind != "gaussian":
        raise UnsupportedKernelError("random Fourier features are only defined for the gaussian kernel")
    x = np.asarray(x, dtype=np.float64)
    rows = _as_rows(x)
    w, b = spec.rff_params(rows.shape[1])
    out = np.sqrt(2.0 / spec.rff_dim) * np.cos(rows @ w.T + b)
    return out[0] if x.ndim == 1 else out


def edge_features(spec: KernelSpec, edge_attrs) -> np.ndarray:
    """Feature vectors stored in the edge array: raw attributes (linear) or RFF (gaussian)."""
    edge_attrs = _as_rows(edge_attrs)
    if spec.kind == "linear":
        return edge_attrs.copy()
    if edge_attrs.shape[0] == 0:
        return np.zeros((0, spec.rff_dim))
    return rff_map(spec, edge_attrs)
