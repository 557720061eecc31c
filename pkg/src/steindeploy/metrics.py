"""Deployment quality metrics shared by all methods.

Every metric is evaluated on the common workspace grid, so the point
selection method, the baselines, and any hand-built deployment are scored
on identical footing: distribution match (KL both ways), spacing,
footprint overlap, covered event mass, and a kernelized Stein discrepancy
diagnostic for the particle sets themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .coverage import Pose, SensorModel, footprint_contains, sensor_density
from .density import GaussianMixture, Workspace, grid_evaluate
from .kernels import KernelSpec

__all__ = [
    "Deployment",
    "METHOD_TAGS",
    "collective_kl",
    "min_pairwise_distance",
    "overlap_fraction",
    "covered_mass",
    "ksd_diagnostic",
]

METHOD_TAGS = ("stein", "voronoi", "power")

_FLOOR = 1e-12


@dataclass(frozen=True)
class Deployment:
    """Posed sensor team produced by one method."""

    poses: list[Pose]
    sensors: list[SensorModel]
    method: str

    def __post_init__(self):
        if len(self.poses) != len(self.sensors):
            raise ValueError("poses and sensors must have equal length")
        if self.method not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def positions(self) -> np.ndarray:
        if not self.poses:
            return np.empty((0, 2))
        return np.stack([p.position for p in self.poses])


def _footprint_masks(dep: Deployment, centers: np.ndarray) -> np.ndarray:
    if not dep.sensors:
        return np.zeros((0, centers.shape[0]), dtype=bool)
    return np.stack(
        [footprint_contains(s, pose, centers) for s, pose in zip(dep.sensors, dep.poses)]
    )


def collective_kl(dep: Deployment, gmm: GaussianMixture, ws: Workspace) -> tuple[float, float]:
    """KL divergences between the team's collective service and the events.

    The collective service is the equal-weight mixture of the posed sensor
    densities.  Both it and the event density are discretized on the
    workspace grid and renormalized; returns (KL(q||p), KL(p||q)) with
    1e-12 flooring inside the log ratios.
    """
    grid = grid_evaluate(gmm, ws)
    q = np.zeros(grid.centers.shape[0])
    for s, pose in zip(dep.sensors, dep.poses):
        q += sensor_density(s, pose, grid.centers)
    total = q.sum()
    if total <= 0.0:
        raise ValueError("collective service density has no mass on the grid")
    qm = q / total
    pm = grid.mass
    qf = np.maximum(qm, _FLOOR)
    pf = np.maximum(pm, _FLOOR)
    kl_qp = float(np.sum(qm * np.log(qf / pf)))
    kl_pq = float(np.sum(pm * np.log(pf / qf)))
    return kl_qp, kl_pq


def min_pairwise_distance(poses: list[Pose]) -> float:
    if len(poses) < 2:
        raise ValueError("need at least two poses")
    pos = np.stack([p.position for p in poses])
    return float(pdist(pos).min())


def overlap_fraction(dep: Deployment, ws: Workspace) -> float:
    """Fraction of total footprint area shared between sensors.

    Computed by cell counting on the workspace grid: (sum of individual
    footprint areas - union area) / sum of individual areas.  Zero iff no
    two footprints share a grid cell.
    """
    masks = _footprint_masks(dep, ws.cell_centers())
    total = int(masks.sum())
    if total == 0:
        return 0.0
    union = int(masks.any(axis=0).sum())
    return float((total - union) / total)


def covered_mass(dep: Deployment, gmm: GaussianMixture, ws: Workspace) -> float:
    """Event mass of the grid cells inside the union of footprints."""
    grid = grid_evaluate(gmm, ws)
    masks = _footprint_masks(dep, grid.centers)
    if masks.shape[0] == 0:
        return 0.0
    return float(grid.mass[masks.any(axis=0)].sum())


def ksd_diagnostic(points: np.ndarray, gmm: GaussianMixture, spec: KernelSpec) -> float:
    """Empirical kernelized Stein discrepancy of a point set against the density.

    V-statistic over all ordered pairs of the Stein-operator kernel: for
    k(x, y) = exp(-d^T A d) with d = x - y and A = W^{-1}/h,

        u(x, y) = k * [ s(x).s(y) + 2 s(x).A d - 2 s(y).A d
                        + 2 tr(A) - 4 d.A^2 d ]

    where s is the density score.  Returns sqrt(mean u), a nonnegative
    monotone diagnostic (smaller = closer to the density); not a test
    statistic.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two points")
    a = spec.inv_weight / spec.bandwidth
    scores = gmm.score(x)
    diff = x[:, None, :] - x[None, :, :]
    ad = diff @ a
    gram = np.exp(-np.sum(diff * ad, axis=2))
    dot_ss = scores @ scores.T
    s_ad_row = np.einsum("ac,abc->ab", scores, ad)  # s(x_a) . A d_ab
    s_ad_col = np.einsum("bc,abc->ab", scores, ad)  # s(x_b) . A d_ab
    d_a2_d = np.einsum("abi,ij,abj->ab", diff, a @ a, diff)
    u = gram * (dot_ss + 2.0 * s_ad_row - 2.0 * s_ad_col + 2.0 * np.trace(a) - 4.0 * d_a2_d)
    return float(np.sqrt(max(u.mean(), 0.0)))
