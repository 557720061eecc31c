"""Positive-definite kernels for the particle transport engine.

Two families: the plain RBF kernel and a Mahalanobis-Gaussian kernel whose
metric is shaped by a weight matrix derived from the particles' empirical
variance.  Shrinking the weight matrix expands the effective metric, which
is how the transport engine turns the spread constraint into a repulsive
force between particles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

__all__ = [
    "KernelSpec",
    "VarianceState",
    "kernel_eval",
    "kernel_grad_x",
    "kernel_matrix",
    "median_heuristic",
    "empirical_variance",
    "update_weight_matrix",
]

RBF = "rbf"
MAHALANOBIS = "mahalanobis"

#: Regularizer added to the empirical variance before matrix exponentiation,
#: so the weight matrix stays invertible when particles collapse early.
VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """A resolved kernel: family, numeric bandwidth, SPD weight matrix.

    ``weight`` is the identity for the RBF family.  The kernel value is
    exp(-(x - y)^T W^{-1} (x - y) / h), always in (0, 1].
    """

    family: str
    bandwidth: float
    weight: np.ndarray

    def __post_init__(self):
        if self.family not in (RBF, MAHALANOBIS):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not (self.bandwidth > 0):
            raise ValueError("bandwidth must be positive")
        w = np.asarray(self.weight, dtype=float)
        if w.shape != (2, 2) or not np.allclose(w, w.T, atol=1e-9):
            raise ValueError("weight matrix must be 2x2 symmetric")
        if np.linalg.eigvalsh(w).min() <= 0:
            raise ValueError("weight matrix must be positive definite")
        object.__setattr__(self, "weight", w)

    @staticmethod
    def rbf(bandwidth: float) -> "KernelSpec":
        return KernelSpec(RBF, bandwidth, np.eye(2))

    @property
    def inv_weight(self) -> np.ndarray:
        return np.linalg.inv(self.weight)


@dataclass(frozen=True)
class VarianceState:
    """Empirical mean and (biased) variance of a particle set.

    ``floor`` is the diagonal regularizer applied when the variance is
    mapped to a weight matrix; the regularized matrix is always SPD.
    """

    mean: np.ndarray
    var: np.ndarray
    floor: float = VARIANCE_FLOOR

    def regularized(self) -> np.ndarray:
        return self.var + self.floor * np.eye(2)


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kernel value exp(-(x-y)^T W^{-1} (x-y) / h); symmetric in (x, y)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    quad = np.einsum("...i,ij,...j->...", d, spec.inv_weight, d)
    return np.exp(-quad / spec.bandwidth)


def kernel_grad_x(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of :func:`kernel_eval` in its first argument.

    Equals -(2/h) W^{-1} (x - y) k(x, y); antisymmetric under swapping the
    arguments, and zero at x = y.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    k = kernel_eval(spec, x, y)
    pull = np.einsum("ij,...j->...i", spec.inv_weight, d)
    return -(2.0 / spec.bandwidth) * pull * k[..., None]


def kernel_matrix(spec: KernelSpec, points: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = k(x_i, x_j) for a stack of points (n, 2)."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    quad = np.einsum("abi,ij,abj->ab", diff, spec.inv_weight, diff)
    return np.exp(-quad / spec.bandwidth)


def median_heuristic(points: np.ndarray) -> float:
    """Bandwidth h = med^2 / log(n + 1) from the median pairwise distance.

    Returns the 1e-8 floor when all points coincide.  Fewer than two
    points is an error: the heuristic is undefined for a degenerate set.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("median heuristic needs at least two points")
    med = float(np.median(pdist(pts)))
    h = med**2 / np.log(n + 1)
    return max(h, 1e-8)


def empirical_variance(points: np.ndarray, floor: float = VARIANCE_FLOOR) -> VarianceState:
    """Mean and biased covariance (1/n) sum (x_i - mu)(x_i - mu)^T."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("empirical variance needs at least one point")
    mean = pts.mean(axis=0)
    centered = pts - mean
    var = centered.T @ centered / pts.shape[0]
    return VarianceState(mean=mean, var=var, floor=floor)


def update_weight_matrix(vs: VarianceState, h: float, mode: str = "matrix") -> np.ndarray:
    """Map the regularized empirical variance V to a weight matrix.

    ``matrix`` mode computes the symmetric matrix exponential expm(-V/h)
    through an eigendecomposition: eigenvalues map to exp(-lambda/h) with
    eigenvectors preserved, so the result is SPD with eigenvalues in
    (0, 1].  An elementwise exponential would not guarantee positive
    definiteness, which the Mahalanobis kernel requires.

    ``scalar`` mode collapses the variance to its trace first and returns
    exp(-trace(V)/h) * I, kept for comparison runs.
    """
    if not (h > 0):
        raise ValueError("bandwidth must be positive")
    v = vs.regularized()
    if mode == "scalar":
        return float(np.exp(-np.trace(v) / h)) * np.eye(2)
    if mode != "matrix":
        raise ValueError(f"unknown weight mode {mode!r}")
    lam, vec = np.linalg.eigh(v)
    w = (vec * np.exp(-lam / h)) @ vec.T
    return 0.5 * (w + w.T)
