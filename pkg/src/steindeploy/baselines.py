"""Grid-based Voronoi and power-diagram deployment baselines.

Sites partition the workspace lattice by (power) distance and move to the
density-weighted centroids of their cells until the motion stalls: the
discrete form of the classic locational-cost descent.  Plain Voronoi is
the all-zero-weights case; power diagrams subtract a per-site additive
weight (squared footprint radius) from the squared distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import DensityGrid, GaussianMixture, Workspace, grid_evaluate

__all__ = [
    "Partition",
    "LloydResult",
    "partition_grid",
    "weighted_centroid",
    "locational_cost",
    "lloyd_run",
]

SITE_MOVEMENT_TOLERANCE = 1e-4


@dataclass(frozen=True)
class Partition:
    """Cell labels over the workspace grid for a set of weighted sites."""

    labels: np.ndarray  # (res*res,) site index per cell
    sites: np.ndarray  # (m, 2)
    weights: np.ndarray  # (m,)


@dataclass
class LloydResult:
    sites: np.ndarray
    cost_history: list[float]
    iterations: int
    converged: bool
    # (iteration, site index) whenever a site's cell was empty or massless
    empty_cells: list[tuple[int, int]] = field(default_factory=list)


def partition_grid(sites: np.ndarray, weights: np.ndarray, ws: Workspace) -> Partition:
    """Label each grid cell with its power-nearest site (ties to lowest index)."""
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if sites.shape[0] < 1 or sites.shape[0] != weights.shape[0]:
        raise ValueError("need at least one site and one weight per site")
    centers = ws.cell_centers()
    d2 = ((centers[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2) - weights[None, :]
    return Partition(labels=np.argmin(d2, axis=1), sites=sites, weights=weights)


def weighted_centroid(part: Partition, j: int, grid: DensityGrid) -> tuple[np.ndarray, bool]:
    """Density-weighted centroid of site j's cell.

    Returns (point, True) normally.  An empty or massless cell leaves the
    site unmoved and flags it (point, False) so callers can report it;
    power diagrams can legitimately produce empty cells.
    """
    mask = part.labels == j
    mass = grid.mass[mask]
    total = float(mass.sum())
    if not mask.any() or total <= 0.0:
        return part.sites[j].copy(), False
    centroid = (grid.centers[mask] * mass[:, None]).sum(axis=0) / total
    return centroid, True


def locational_cost(
    sites: np.ndarray, weights: np.ndarray, gmm: GaussianMixture, ws: Workspace
) -> float:
    """Discrete locational cost: sum over cells of (power distance) * mass."""
    grid = grid_evaluate(gmm, ws)
    return _cost_on_grid(sites, weights, grid, ws)


def _cost_on_grid(
    sites: np.ndarray, weights: np.ndarray, grid: DensityGrid, ws: Workspace
) -> float:
    part = partition_grid(sites, weights, ws)
    assigned = part.sites[part.labels]
    d2 = ((grid.centers - assigned) ** 2).sum(axis=1) - part.weights[part.labels]
    return float(np.sum(d2 * grid.mass))


def lloyd_run(
    initial_sites: np.ndarray,
    weights: np.ndarray,
    gmm: GaussianMixture,
    ws: Workspace,
    max_iters: int = 100,
) -> LloydResult:
    """Alternate partition and centroid steps until sites stop moving.

    The recorded cost history starts with the initial configuration and
    appends one entry per iteration; it is nonincreasing up to grid
    discretization because each half-step minimizes the same objective.
    """
    sites = np.atleast_2d(np.asarray(initial_sites, dtype=float)).copy()
    weights = np.asarray(weights, dtype=float).reshape(-1)
    grid = grid_evaluate(gmm, ws)
    result = LloydResult(
        sites=sites,
        cost_history=[_cost_on_grid(sites, weights, grid, ws)],
        iterations=0,
        converged=False,
    )
    for it in range(1, max_iters + 1):
        part = partition_grid(sites, weights, ws)
        moved = np.empty_like(sites)
        for j in range(sites.shape[0]):
            moved[j], ok = weighted_centroid(part, j, grid)
            if not ok:
                result.empty_cells.append((it, j))
        movement = float(np.linalg.norm(moved - sites, axis=1).max())
        sites = moved
        result.cost_history.append(_cost_on_grid(sites, weights, grid, ws))
        result.iterations = it
        if movement < SITE_MOVEMENT_TOLERANCE:
            result.converged = True
            break
    result.sites = sites
    return result
