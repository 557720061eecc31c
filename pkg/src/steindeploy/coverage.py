"""Sensor service models, effective footprints, and footprint KL costs.

A sensor's quality of service is a 2-D Gaussian rigidly attached to its
pose: translating the pose moves the mean, rotating it conjugates the
body-frame covariance by the rotation matrix.  The effective footprint is
a compact region (disc, or the covariance ellipse at a fixed sigma level)
on which the deployment cost compares the sensor's service distribution
against the event density by a discrete KL divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import GaussianMixture, Workspace, _validate_cov

__all__ = [
    "SensorModel",
    "Pose",
    "OrientationGrid",
    "rotation_matrix",
    "sensor_density",
    "footprint_contains",
    "footprint_points",
    "kl_footprint_cost",
    "best_orientation",
    "build_cost_matrix",
]

DISC = "disc"
ELLIPSE = "ellipse"

#: Nominal number of sub-grid points inside an unclipped footprint.
FOOTPRINT_POINT_TARGET = 256

#: Floor applied to the renormalized event density before the KL ratio.
KL_DENSITY_FLOOR = 1e-12


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Pose:
    """Sensor position and orientation (radians, wrapped into [0, 2*pi))."""

    position: np.ndarray
    orientation: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(2)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", float(self.orientation) % (2.0 * np.pi))


@dataclass(frozen=True)
class OrientationGrid:
    """Finite set of candidate deployment orientations."""

    angles: np.ndarray

    def __post_init__(self):
        ang = np.asarray(self.angles, dtype=float).reshape(-1)
        if ang.size < 1:
            raise ValueError("orientation grid needs at least one angle")
        if np.any(ang < 0) or np.any(ang >= 2.0 * np.pi):
            raise ValueError("orientations must lie in [0, 2*pi)")
        if ang.size > 1 and np.any(np.diff(ang) <= 0):
            raise ValueError("orientations must be strictly increasing")
        object.__setattr__(self, "angles", ang)

    @staticmethod
    def regular(count: int) -> "OrientationGrid":
        if count < 1:
            raise ValueError("orientation count must be >= 1")
        return OrientationGrid(2.0 * np.pi * np.arange(count) / count)

    @property
    def count(self) -> int:
        return self.angles.size


@dataclass(frozen=True)
class SensorModel:
    """One sensor: body-frame Gaussian service plus a compact footprint.

    ``footprint`` is either a disc of fixed ``radius`` or the covariance
    ellipse at the ``scale``-sigma level set.  ``bound`` is the radius of
    the smallest disc enclosing the footprint, which every deployment's
    global spread radius must dominate.
    """

    id: int
    cov: np.ndarray
    footprint: str = DISC
    radius: float | None = None
    scale: float = 2.0

    def __post_init__(self):
        cov = _validate_cov(self.cov, f"sensor {self.id}")
        object.__setattr__(self, "cov", cov)
        if self.footprint == DISC:
            if self.radius is None or not (self.radius > 0):
                raise ValueError(f"sensor {self.id}: disc footprint needs a positive radius")
        elif self.footprint == ELLIPSE:
            if not (self.scale > 0):
                raise ValueError(f"sensor {self.id}: ellipse footprint needs a positive scale")
        else:
            raise ValueError(f"sensor {self.id}: unknown footprint {self.footprint!r}")

    @staticmethod
    def isotropic(id: int, sigma: float, footprint_scale: float = 2.0) -> "SensorModel":
        """Isotropic sensor with a disc footprint of radius scale * sigma."""
        if not (sigma > 0):
            raise ValueError(f"sensor {id}: sigma must be positive")
        return SensorModel(
            id=id,
            cov=sigma**2 * np.eye(2),
            footprint=DISC,
            radius=footprint_scale * sigma,
            scale=footprint_scale,
        )

    @staticmethod
    def anisotropic(id: int, cov: np.ndarray, footprint_scale: float = 2.0) -> "SensorModel":
        """Anisotropic sensor bounded by its scale-sigma covariance ellipse."""
        return SensorModel(id=id, cov=cov, footprint=ELLIPSE, scale=footprint_scale)

    @property
    def is_isotropic(self) -> bool:
        return self.cov[0, 1] == 0.0 and self.cov[1, 0] == 0.0 and self.cov[0, 0] == self.cov[1, 1]

    @property
    def bound(self) -> float:
        """Radius of the smallest disc enclosing the footprint."""
        if self.footprint == DISC:
            return float(self.radius)
        return float(self.scale * np.sqrt(np.linalg.eigvalsh(self.cov).max()))

    def rotated_cov(self, theta: float) -> np.ndarray:
        # rotating an isotropic covariance is the identity operation; skip it
        # so orientations compare bit-identically
        if self.is_isotropic:
            return self.cov
        r = rotation_matrix(theta)
        c = r @ self.cov @ r.T
        return 0.5 * (c + c.T)

    def footprint_area(self) -> float:
        if self.footprint == DISC:
            return float(np.pi * self.radius**2)
        return float(np.pi * self.scale**2 * np.sqrt(np.linalg.det(self.cov)))

    def grid_pitch(self) -> float:
        return float(np.sqrt(self.footprint_area() / FOOTPRINT_POINT_TARGET))


def _gaussian_log_density(mean: np.ndarray, cov: np.ndarray, x: np.ndarray) -> np.ndarray:
    inv = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    diff = np.asarray(x, dtype=float) - mean
    quad = np.einsum("...i,ij,...j->...", diff, inv, diff)
    return -np.log(2.0 * np.pi) - 0.5 * logdet - 0.5 * quad


def sensor_density(s: SensorModel, pose: Pose, x: np.ndarray) -> np.ndarray:
    """Service density at x: Gaussian moved and rotated rigidly with the pose."""
    cov = s.rotated_cov(pose.orientation)
    return np.exp(_gaussian_log_density(pose.position, cov, x))


def footprint_contains(s: SensorModel, pose: Pose, x: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside the posed footprint (boundary counts)."""
    diff = np.asarray(x, dtype=float) - pose.position
    if s.footprint == DISC:
        return (diff**2).sum(axis=-1) <= s.radius**2
    inv = np.linalg.inv(s.rotated_cov(pose.orientation))
    quad = np.einsum("...i,ij,...j->...", diff, inv, diff)
    return quad <= s.scale**2


def footprint_points(s: SensorModel, pose: Pose, ws: Workspace) -> np.ndarray:
    """Sub-grid cell centers inside the posed footprint and the workspace.

    The sub-grid is centered on the pose with pitch chosen so an unclipped
    footprint holds roughly :data:`FOOTPRINT_POINT_TARGET` points.  Empty
    when the footprint misses the workspace entirely.
    """
    pitch = s.grid_pitch()
    half = int(np.ceil(s.bound / pitch))
    offs = np.arange(-half, half + 1) * pitch
    ox, oy = np.meshgrid(offs, offs)
    pts = pose.position + np.column_stack([ox.ravel(), oy.ravel()])
    mask = footprint_contains(s, pose, pts) & ws.contains(pts)
    return pts[mask]


def kl_footprint_cost(s: SensorModel, pose: Pose, gmm: GaussianMixture, ws: Workspace) -> float:
    """Discrete KL(service || events) over the footprint sub-grid.

    Both densities are restricted to the footprint points and renormalized
    to sum to one; the event side is floored at :data:`KL_DENSITY_FLOOR`
    before the log ratio.  An empty footprint (no workspace overlap) is an
    infeasible placement and costs +inf.
    """
    pts = footprint_points(s, pose, ws)
    if pts.shape[0] == 0:
        return float("inf")
    sv = sensor_density(s, pose, pts)
    pv = gmm.density(pts)
    sv = sv / sv.sum()
    pv = np.maximum(pv / pv.sum(), KL_DENSITY_FLOOR)
    return float(np.sum(sv * np.log(sv / pv)))


def best_orientation(
    s: SensorModel,
    poi: np.ndarray,
    grid: OrientationGrid,
    gmm: GaussianMixture,
    ws: Workspace,
) -> tuple[float, float]:
    """Exhaustive orientation search at a fixed candidate position.

    Returns (angle, cost) minimizing the footprint KL over the grid, ties
    going to the smallest grid index.  If every orientation is infeasible
    the cost is +inf and the first grid angle is returned.
    """
    poi = np.asarray(poi, dtype=float).reshape(2)
    costs = np.array(
        [kl_footprint_cost(s, Pose(poi, theta), gmm, ws) for theta in grid.angles]
    )
    best = int(np.argmin(costs))
    return float(grid.angles[best]), float(costs[best])


def build_cost_matrix(
    sensors: list[SensorModel],
    pois: np.ndarray,
    grid: OrientationGrid,
    gmm: GaussianMixture,
    ws: Workspace,
) -> tuple[np.ndarray, np.ndarray]:
    """Orientation-minimized cost of every sensor at every candidate point.

    Returns (costs, angles), both shaped (len(sensors), len(pois)).
    Infeasible placements carry +inf and are resolved by the assignment
    stage.
    """
    pois = np.asarray(pois, dtype=float)
    if len(sensors) < 1 or pois.shape[0] < len(sensors):
        raise ValueError("need at least one sensor and at least as many candidate points")
    costs = np.empty((len(sensors), pois.shape[0]))
    angles = np.empty_like(costs)
    for i, s in enumerate(sensors):
        for j in range(pois.shape[0]):
            angles[i, j], costs[i, j] = best_orientation(s, pois[j], grid, gmm, ws)
    return costs, angles
