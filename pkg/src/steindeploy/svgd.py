"""Particle transport engine for selecting deployment points.

Implements the classic kernelized particle update (attraction along the
density score plus kernel repulsion) and a spatially regulated variant
that refreshes the kernel's weight matrix from the particles' empirical
variance every iteration, so the cloud is pushed toward a target mean
squared pairwise separation.  A designated subset of particles can skip
the repulsion term entirely and climb the density by pure gradient
ascent, keeping representatives on the local modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import GaussianMixture, Workspace
from .kernels import (
    MAHALANOBIS,
    KernelSpec,
    empirical_variance,
    kernel_eval,
    kernel_grad_x,
    kernel_matrix,
    median_heuristic,
    update_weight_matrix,
)

__all__ = [
    "ParticleSet",
    "SvgdConfig",
    "Trace",
    "AdaGradScaler",
    "svgd_direction",
    "svgd_directions",
    "svgd_step",
    "run",
    "spread_deficit",
    "designate_map_particles",
    "uniform_particles",
]


@dataclass(frozen=True)
class ParticleSet:
    """Candidate deployment points inside a workspace at some iteration."""

    workspace: Workspace
    positions: np.ndarray  # (n, 2)
    iteration: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must have shape (n, 2) with n >= 1")
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class SvgdConfig:
    """Transport engine settings.

    ``map_particle_count=None`` resolves at run time to ceil(0.1 * n) for
    regulated runs and 0 otherwise, so the vanilla engine stays the plain
    kernelized update.  ``spread_radius`` is the footprint bound the
    regulated variant tries to respect via the mean squared pairwise
    separation.
    """

    step_size: float = 0.5
    max_iterations: int = 1000
    spread_radius: float = 1.0
    map_particle_count: int | None = None
    regulated: bool = True
    convergence_tolerance: float = 1e-4
    adaptive_step: bool = True

    def __post_init__(self):
        if not (self.step_size >= 0):
            raise ValueError("step_size must be nonnegative")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not (self.spread_radius > 0):
            raise ValueError("spread_radius must be positive")
        if not (self.convergence_tolerance > 0):
            raise ValueError("convergence_tolerance must be positive")
        if self.map_particle_count is not None and self.map_particle_count < 0:
            raise ValueError("map_particle_count must be nonnegative")

    def resolved_map_count(self, n: int) -> int:
        if self.map_particle_count is not None:
            if self.map_particle_count > n:
                raise ValueError("map_particle_count exceeds particle count")
            return self.map_particle_count
        return math.ceil(0.1 * n) if self.regulated else 0


@dataclass
class Trace:
    """Per-iteration run diagnostics (one entry per completed step)."""

    iterations: list[int] = field(default_factory=list)
    max_displacement: list[float] = field(default_factory=list)
    spread_deficit: list[float] = field(default_factory=list)
    trace_var: list[float] = field(default_factory=list)
    converged: bool = False

    def append(self, iteration: int, disp: float, deficit: float, tvar: float) -> None:
        self.iterations.append(iteration)
        self.max_displacement.append(disp)
        self.spread_deficit.append(deficit)
        self.trace_var.append(tvar)

    def rows(self):
        return zip(self.iterations, self.max_displacement, self.spread_deficit, self.trace_var)


class AdaGradScaler:
    """Per-coordinate step scaling from a decaying sum of squared directions.

    First call seeds the accumulator with the squared direction itself;
    later calls blend with factor ``decay``.  Scaled output is
    direction / (fudge + sqrt(accumulator)).
    """

    def __init__(self, decay: float = 0.9, fudge: float = 1e-6):
        self.decay = decay
        self.fudge = fudge
        self._accum: np.ndarray | None = None

    def scale(self, direction: np.ndarray) -> np.ndarray:
        sq = direction**2
        if self._accum is None:
            self._accum = sq
        else:
            self._accum = self.decay * self._accum + (1.0 - self.decay) * sq
        return direction / (self.fudge + np.sqrt(self._accum))


def uniform_particles(ws: Workspace, count: int, seed: int) -> ParticleSet:
    """Seeded uniform initialization over the workspace rectangle."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(ws.x_min, ws.x_max, size=count)
    y = rng.uniform(ws.y_min, ws.y_max, size=count)
    return ParticleSet(workspace=ws, positions=np.column_stack([x, y]))


def svgd_directions(positions: np.ndarray, gmm: GaussianMixture, spec: KernelSpec) -> np.ndarray:
    """Update direction for every particle, shape (n, 2).

    For particle i the direction is the mean over j of
    score(x_j) k(x_j, x_i) + grad_{x_j} k(x_j, x_i): a kernel-smoothed
    pull toward high density plus a repulsive term that keeps the cloud
    from collapsing onto the modes.
    """
    x = np.asarray(positions, dtype=float)
    n = x.shape[0]
    scores = gmm.score(x)
    gram = kernel_matrix(spec, x)  # symmetric
    attract = gram @ scores
    col_sum = gram.sum(axis=0)
    # sum_j k(x_j, x_i) W^{-1} (x_j - x_i), as rows
    repulse = -(2.0 / spec.bandwidth) * ((gram @ x) - x * col_sum[:, None]) @ spec.inv_weight
    return (attract + repulse) / n


def svgd_direction(ps: ParticleSet, gmm: GaussianMixture, spec: KernelSpec, index: int) -> np.ndarray:
    """Update direction of a single particle (mean over the full set)."""
    x = ps.positions
    xi = x[index]
    k_col = kernel_eval(spec, x, xi)
    grads = kernel_grad_x(spec, x, xi)
    return (gmm.score(x) * k_col[:, None] + grads).mean(axis=0)


def svgd_step(
    ps: ParticleSet,
    gmm: GaussianMixture,
    spec: KernelSpec,
    cfg: SvgdConfig,
    map_indices: np.ndarray | None = None,
    scaler: AdaGradScaler | None = None,
) -> ParticleSet:
    """One transport step; the result is clamped to the workspace.

    Particles listed in ``map_indices`` move along the raw density score
    (no kernel smoothing, no repulsion).  When ``cfg.adaptive_step`` is
    set, pass a persistent ``scaler`` to accumulate squared directions
    across iterations; a fresh one is created otherwise.
    """
    direction = svgd_directions(ps.positions, gmm, spec)
    if map_indices is not None and len(map_indices) > 0:
        idx = np.asarray(map_indices, dtype=int)
        direction[idx] = gmm.score(ps.positions[idx])

    bad = ~np.isfinite(direction).all(axis=1)
    if bad.any():
        raise FloatingPointError(
            f"non-finite update direction for particle {int(np.flatnonzero(bad)[0])}"
        )

    if cfg.adaptive_step:
        if scaler is None:
            scaler = AdaGradScaler()
        direction = scaler.scale(direction)

    moved = ps.positions + cfg.step_size * direction
    return ParticleSet(
        workspace=ps.workspace,
        positions=ps.workspace.clamp(moved),
        iteration=ps.iteration + 1,
    )


def spread_deficit(points, spread_radius: float) -> float:
    """Mean squared pairwise separation minus the squared footprint bound.

    The mean runs over ordered pairs i != j; a nonnegative value means the
    spread constraint is met.  Undefined (an error) for fewer than two
    points.
    """
    pos = points.positions if isinstance(points, ParticleSet) else np.asarray(points, dtype=float)
    n = pos.shape[0]
    if n < 2:
        raise ValueError("spread deficit needs at least two points")
    diff = pos[:, None, :] - pos[None, :, :]
    sq = (diff**2).sum(axis=2)
    mean_sq = sq.sum() / (n * (n - 1))
    return float(mean_sq - spread_radius**2)


def designate_map_particles(ps: ParticleSet, gmm: GaussianMixture, n_map: int) -> np.ndarray:
    """Indices of the n_map particles with highest initial log-density.

    These follow pure gradient ascent for the whole run; the returned
    indices are sorted ascending and the selection is deterministic under
    ties (stable sort by density, then index).
    """
    if n_map > ps.count:
        raise ValueError("n_map exceeds particle count")
    if n_map == 0:
        return np.empty(0, dtype=int)
    logp = gmm.log_density(ps.positions)
    order = np.argsort(-logp, kind="stable")
    return np.sort(order[:n_map])


def _resolve_kernel(
    positions: np.ndarray,
    regulated: bool,
    bandwidth: float | str,
    weight_mode: str,
) -> KernelSpec:
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
        # single particle: kernel reduces to k(x, x) = 1, bandwidth is moot
        h = median_heuristic(positions) if positions.shape[0] >= 2 else 1.0
    else:
        h = float(bandwidth)
    if regulated:
        vs = empirical_variance(positions)
        w = update_weight_matrix(vs, h, mode=weight_mode)
        return KernelSpec(MAHALANOBIS, h, w)
    return KernelSpec.rbf(h)


def run(
    ps0: ParticleSet,
    gmm: GaussianMixture,
    cfg: SvgdConfig,
    bandwidth: float | str = "median",
    weight_mode: str = "matrix",
) -> tuple[ParticleSet, Trace]:
    """Full transport loop; returns the final particles and the trace.

    Regulated runs rebuild the weight matrix from the current empirical
    variance before every step; vanilla runs use the RBF kernel.  The
    median-heuristic bandwidth (the default) is recomputed each iteration.
    Stops early when the largest particle displacement drops below
    ``cfg.convergence_tolerance``.
    """
    map_idx = designate_map_particles(ps0, gmm, cfg.resolved_map_count(ps0.count))
    scaler = AdaGradScaler() if cfg.adaptive_step else None
    trace = Trace()
    ps = ps0
    for _ in range(cfg.max_iterations):
        spec = _resolve_kernel(ps.positions, cfg.regulated, bandwidth, weight_mode)
        stepped = svgd_step(ps, gmm, spec, cfg, map_indices=map_idx, scaler=scaler)
        disp = float(np.linalg.norm(stepped.positions - ps.positions, axis=1).max())
        deficit = (
            spread_deficit(stepped.positions, cfg.spread_radius) if stepped.count >= 2 else float("nan")
        )
        tvar = float(np.trace(empirical_variance(stepped.positions).var))
        trace.append(stepped.iteration, disp, deficit, tvar)
        ps = stepped
        if disp < cfg.convergence_tolerance:
            trace.converged = True
            break
    return ps, trace
