"""Minimum-cost bipartite matching of sensors to candidate points.

The matrix may be rectangular (fewer sensors than points) and may carry
+inf entries for infeasible placements.  The solver is exact, reports
infeasibility explicitly, and breaks ties deterministically by returning
the lexicographically smallest optimal pair list, so repeated runs of a
pipeline produce identical deployments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coverage import Pose

__all__ = [
    "Matching",
    "InfeasibleMatchingError",
    "hungarian_solve",
    "brute_force_assignment",
    "finalize_deployment",
]

_BRUTE_FORCE_LIMIT = 8


class InfeasibleMatchingError(RuntimeError):
    """No full sensor-to-point matching exists among finite-cost entries."""


@dataclass(frozen=True)
class Matching:
    """A complete assignment: every sensor paired with a distinct point."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float
    orientations: tuple[float, ...] | None = None

    def __post_init__(self):
        rows = [i for i, _ in self.pairs]
        cols = [j for _, j in self.pairs]
        if rows != list(range(len(rows))):
            raise ValueError("pairs must list each sensor exactly once, in order")
        if len(set(cols)) != len(cols):
            raise ValueError("a point may be used at most once")
        if self.orientations is not None and len(self.orientations) != len(self.pairs):
            raise ValueError("orientations must match pairs")

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(j for _, j in self.pairs)


def _validated(cost: np.ndarray) -> np.ndarray:
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] < 1:
        raise ValueError("cost must be a 2-D matrix with at least one row")
    if c.shape[0] > c.shape[1]:
        raise ValueError("need at least as many points as sensors (rows <= columns)")
    if np.isnan(c).any():
        raise ValueError("cost matrix contains NaN")
    return c


def _total(entries) -> float:
    # fsum gives the correctly rounded sum, so equal-cost assignments
    # compare equal regardless of summation order
    return math.fsum(entries)


def hungarian_solve(cost: np.ndarray) -> Matching:
    """Exact minimum-cost matching with deterministic tie-breaking.

    +inf entries are replaced by a large finite sentinel before solving;
    if the optimum still needs a sentinel entry, no feasible matching
    exists and :class:`InfeasibleMatchingError` is raised.  Among equal
    optima the lexicographically smallest pair list is returned.
    """
    c = _validated(cost)
    n_rows, n_cols = c.shape
    finite = np.isfinite(c)
    if (~finite.any(axis=1)).any():
        bad = int(np.flatnonzero(~finite.any(axis=1))[0])
        raise InfeasibleMatchingError(f"sensor {bad} has no feasible point")

    if finite.all():
        work = c
    else:
        scale = float(np.abs(c[finite]).max()) if finite.any() else 1.0
        work = np.where(finite, c, scale * 1e6 + 1e6)

    rows, cols = linear_sum_assignment(work)
    best = _total(work[rows, cols])

    # refine to the lexicographically smallest optimal pair list: fix rows
    # in order, accepting the smallest column whose optimal completion
    # still attains the optimum
    chosen: list[int] = []
    prefix: list[float] = []
    available = list(range(n_cols))
    for i in range(n_rows):
        for j in available:
            rest_cols = [col for col in available if col != j]
            if i + 1 < n_rows:
                sub = work[np.ix_(range(i + 1, n_rows), rest_cols)]
                rr, cc = linear_sum_assignment(sub)
                total = _total(prefix + [work[i, j]] + list(sub[rr, cc]))
            else:
                total = _total(prefix + [work[i, j]])
            if total <= best:
                chosen.append(j)
                prefix.append(work[i, j])
                available.remove(j)
                break
        else:  # pragma: no cover - the solver's own column always qualifies
            raise AssertionError("refinement failed to extend an optimal matching")

    if any(not finite[i, j] for i, j in enumerate(chosen)):
        raise InfeasibleMatchingError("every full matching crosses an infeasible entry")

    pairs = tuple((i, j) for i, j in enumerate(chosen))
    return Matching(pairs=pairs, total_cost=_total(c[i, j] for i, j in pairs))


def brute_force_assignment(cost: np.ndarray) -> Matching:
    """Exhaustive minimum over all injections of sensors into points.

    Test oracle; guarded to at most 8 sensors.  Uses the same summation
    and lexicographic tie-break as :func:`hungarian_solve`, so totals of
    the two solvers compare exactly equal.
    """
    c = _validated(cost)
    n_rows, n_cols = c.shape
    if n_rows > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {_BRUTE_FORCE_LIMIT} sensors, got {n_rows}")

    best_total = math.inf
    best_cols: tuple[int, ...] | None = None
    for cols in itertools.permutations(range(n_cols), n_rows):
        entries = c[np.arange(n_rows), cols]
        if not np.isfinite(entries).all():
            continue
        total = _total(entries)
        if total < best_total:
            best_total = total
            best_cols = cols
    if best_cols is None:
        raise InfeasibleMatchingError("every full matching crosses an infeasible entry")
    pairs = tuple((i, j) for i, j in enumerate(best_cols))
    return Matching(pairs=pairs, total_cost=best_total)


def finalize_deployment(m: Matching, pois: np.ndarray, angles: np.ndarray) -> list[Pose]:
    """Turn a matching into one pose per sensor.

    Sensor i receives the position of its matched point and the
    orientation recorded for that (sensor, point) entry.
    """
    pois = np.asarray(pois, dtype=float)
    angles = np.asarray(angles, dtype=float)
    return [Pose(pois[j], angles[i, j]) for i, j in m.pairs]
