"""Gaussian-mixture event densities over a rectangular workspace.

The event density tells the deployment pipeline where coverage-worthy
events concentrate.  Everything downstream (particle transport, footprint
costs, baselines, metrics) consumes it through the small API here:
log-density, score (gradient of log-density), exact sampling, and a
discretized evaluation on the workspace grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Workspace",
    "GaussianComponent",
    "GaussianMixture",
    "DensityGrid",
    "log_density",
    "score",
    "sample",
    "grid_evaluate",
]

_MIN_DET = 1e-12


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangular workspace with a square evaluation grid.

    ``grid_resolution`` is the number of cells per axis used by every
    discrete computation (baseline partitions, KL integrals, coverage
    masks), so all methods are compared on the same lattice.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    grid_resolution: int = 100

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("workspace must have positive extent on both axes")
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be at least 2")

    @property
    def cell_size(self) -> tuple[float, float]:
        res = self.grid_resolution
        return ((self.x_max - self.x_min) / res, (self.y_max - self.y_min) / res)

    @property
    def cell_area(self) -> float:
        dx, dy = self.cell_size
        return dx * dy

    def cell_centers(self) -> np.ndarray:
        """Centers of the grid cells, shape (grid_resolution**2, 2).

        Row-major over (row, column) = (y index, x index), so reshaping a
        per-cell array to (res, res) gives [iy, ix] indexing.
        """
        res = self.grid_resolution
        dx, dy = self.cell_size
        xs = self.x_min + (np.arange(res) + 0.5) * dx
        ys = self.y_min + (np.arange(res) + 0.5) * dy
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def clamp(self, points: np.ndarray) -> np.ndarray:
        """Project points onto the rectangle (componentwise clip)."""
        lo = np.array([self.x_min, self.y_min])
        hi = np.array([self.x_max, self.y_max])
        return np.clip(points, lo, hi)

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return (
            (p[..., 0] >= self.x_min)
            & (p[..., 0] <= self.x_max)
            & (p[..., 1] >= self.y_min)
            & (p[..., 1] <= self.y_max)
        )


def _validate_cov(cov: np.ndarray, what: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2):
        raise ValueError(f"{what}: covariance must be 2x2, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-9):
        raise ValueError(f"{what}: covariance must be symmetric")
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    if det < _MIN_DET or cov[0, 0] <= 0 or cov[1, 1] <= 0:
        raise ValueError(f"{what}: covariance is singular or not positive definite")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError(f"{what}: covariance is not positive definite") from None
    return cov


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component: weight in (0, 1], mean, SPD covariance."""

    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.weight <= 1.0):
            raise ValueError(f"component weight must be in (0, 1], got {self.weight}")
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = _validate_cov(self.cov, "GaussianComponent")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


class GaussianMixture:
    """Two-dimensional Gaussian mixture with precomputed factorizations.

    Parameters
    ----------
    components:
        Ordered list of :class:`GaussianComponent`.  Weights must sum to 1
        within 1e-9.  Covariances are Cholesky-validated at construction so
        downstream evaluations never hit a singular matrix.
    """

    def __init__(self, components: list[GaussianComponent]):
        if len(components) < 1:
            raise ValueError("mixture needs at least one component")
        total = sum(c.weight for c in components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component weights must sum to 1, got {total!r}")
        self.components = list(components)
        self.weights = np.array([c.weight for c in components])
        self.means = np.stack([c.mean for c in components])  # (K, 2)
        self.covs = np.stack([c.cov for c in components])  # (K, 2, 2)
        self.K = len(components)

        self._chols = np.stack([np.linalg.cholesky(c) for c in self.covs])
        self._inv_covs = np.stack([np.linalg.inv(c) for c in self.covs])
        # log of 2*pi*sqrt(det) per component, via the Cholesky diagonal
        log_dets = 2.0 * np.log(np.diagonal(self._chols, axis1=1, axis2=2)).sum(axis=1)
        self._log_norms = -np.log(2.0 * np.pi) - 0.5 * log_dets
        self._log_weights = np.log(self.weights)

    def _component_log_densities(self, x: np.ndarray) -> np.ndarray:
        """log N(x | mu_k, Sigma_k) for each component, shape (..., K)."""
        x = np.asarray(x, dtype=float)
        diff = x[..., None, :] - self.means  # (..., K, 2)
        quad = np.einsum("...ki,kij,...kj->...k", diff, self._inv_covs, diff)
        return self._log_norms - 0.5 * quad

    def log_density(self, x: np.ndarray) -> np.ndarray:
        """Mixture log-density via log-sum-exp, stable for narrow components.

        Accepts a single point of shape (2,) or a batch (..., 2); the
        result drops the final axis.
        """
        log_comp = self._component_log_densities(x) + self._log_weights
        m = np.max(log_comp, axis=-1)
        out = m + np.log(np.sum(np.exp(log_comp - m[..., None]), axis=-1))
        return out

    def density(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.log_density(x))

    def score(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the log-density, responsibility-weighted.

        Writing r_k for the posterior component responsibility at x, the
        gradient is sum_k r_k * Sigma_k^{-1} (mu_k - x); evaluating through
        responsibilities avoids the underflow of the naive density ratio.
        """
        x = np.asarray(x, dtype=float)
        log_comp = self._component_log_densities(x) + self._log_weights
        m = np.max(log_comp, axis=-1, keepdims=True)
        w = np.exp(log_comp - m)
        resp = w / np.sum(w, axis=-1, keepdims=True)  # (..., K)
        diff = self.means - x[..., None, :]  # (..., K, 2)
        pull = np.einsum("kij,...kj->...ki", self._inv_covs, diff)
        return np.sum(resp[..., None] * pull, axis=-2)

    def sample(self, count: int, seed: int) -> np.ndarray:
        """Draw ``count`` i.i.d. points; deterministic for a fixed seed."""
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.K, size=count, p=self.weights)
        z = rng.standard_normal((count, 2))
        return self.means[idx] + np.einsum("nij,nj->ni", self._chols[idx], z)


@dataclass(frozen=True)
class DensityGrid:
    """Event density discretized at workspace cell centers.

    ``density`` holds raw density values and ``mass`` the per-cell
    probability (density times cell area, renormalized to sum to one so
    the tail mass outside the workspace is folded back in).  Both are
    flat arrays aligned with :meth:`Workspace.cell_centers`.
    """

    workspace: Workspace
    centers: np.ndarray
    density: np.ndarray
    mass: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        res = self.workspace.grid_resolution
        return (res, res)


def log_density(gmm: GaussianMixture, x: np.ndarray) -> np.ndarray:
    return gmm.log_density(x)


def score(gmm: GaussianMixture, x: np.ndarray) -> np.ndarray:
    return gmm.score(x)


def sample(gmm: GaussianMixture, count: int, seed: int) -> np.ndarray:
    return gmm.sample(count, seed)


def grid_evaluate(gmm: GaussianMixture, ws: Workspace) -> DensityGrid:
    """Evaluate the mixture at cell centers and renormalize cell masses."""
    centers = ws.cell_centers()
    dens = gmm.density(centers)
    mass = dens * ws.cell_area
    total = mass.sum()
    if total <= 0.0:
        raise ValueError("density has no mass on the workspace grid")
    return DensityGrid(workspace=ws, centers=centers, density=dens, mass=mass / total)
