"""Separated, dense point nets over bounded regions.

A net is c-separated (pairwise distances at least c) and 2c-dense (every
region point within 2c of a net point).  Construction is greedy over a fine
candidate grid with spacing at most c/2: greedy selection leaves every
candidate within c of a kept point, and region points are within c/2 of a
candidate along the region, so the 2c-density invariant holds with margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ParameterError
from .base import ModelSpace
from .euclidean import EuclideanSpace

_MAX_CANDIDATES = 400_000


@dataclass(frozen=True)
class SegmentRegion:
    """The geodesic segment from u to v (any model with continuous geodesics)."""
    u: Any
    v: Any


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box in a normed vector space."""
    lo: tuple
    hi: tuple


@dataclass(frozen=True)
class Net:
    points: Any            # model batch
    c: float
    region: Any

    def size(self, space: ModelSpace) -> int:
        return space.batch_size(self.points)

    def nearest(self, space: ModelSpace, p) -> tuple[int, float]:
        d = space.distance_point_to(p, self.points)
        i = int(np.argmin(d))
        return i, float(d[i])


def _candidate_grid(space: ModelSpace, region, c: float):
    step = c / 2.0
    if isinstance(region, SegmentRegion):
        space.validate_point(region.u)
        space.validate_point(region.v)
        d = space.distance(region.u, region.v)
        if not math.isfinite(d):
            raise ParameterError("segment region is unbounded")
        if d == 0.0:
            return space.singleton(region.u)
        m = int(math.floor(d / step))
        ts = np.append(np.arange(m + 1) * step, d)
        if len(ts) > _MAX_CANDIDATES:
            raise ParameterError("candidate grid too large; increase c")
        return space.geodesic_points(region.u, region.v, ts)
    if isinstance(region, BoxRegion):
        if not isinstance(space, EuclideanSpace):
            raise ParameterError("box regions are only defined on normed vector spaces")
        lo = np.asarray(region.lo, dtype=np.float64)
        hi = np.asarray(region.hi, dtype=np.float64)
        if lo.shape != (space.dim,) or hi.shape != (space.dim,):
            raise ParameterError("box bounds must match the space dimension")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi >= lo)):
            raise ParameterError("box region must be bounded with hi >= lo")
        axes = [np.append(np.arange(lo[i], hi[i], step), hi[i]) for i in range(space.dim)]
        total = math.prod(len(a) for a in axes)
        if total > _MAX_CANDIDATES:
            raise ParameterError("candidate grid too large; increase c")
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    raise ParameterError(f"unknown region descriptor {type(region).__name__}")


def build_net(space: ModelSpace, region, c: float) -> Net:
    """Greedy c-separated, 2c-dense net over a bounded region."""
    if c <= 0:
        raise ParameterError(f"net separation must be positive, got {c}")
    candidates = _candidate_grid(space, region, c)
    n = space.batch_size(candidates)
    kept_idx: list[int] = []
    min_dist = np.full(n, np.inf)
    for i in range(n):
        if min_dist[i] >= c:
            kept_idx.append(i)
            d = space.distance_point_to(space.batch_get(candidates, i), candidates)
            np.minimum(min_dist, d, out=min_dist)
    points = space.batch_concat(
        [space.singleton(space.batch_get(candidates, i)) for i in kept_idx])
    return Net(points, float(c), region)


def check_net(space: ModelSpace, net: Net) -> tuple[float, float]:
    """Return (smallest pairwise distance, largest candidate-to-net distance)."""
    pts = net.points
    cross = space.cross_distance(pts, pts)
    np.fill_diagonal(cross, np.inf)
    sep = float(cross.min()) if space.batch_size(pts) > 1 else math.inf
    candidates = _candidate_grid(space, net.region, net.c)
    cover = float(space.cross_distance(candidates, pts).min(axis=1).max())
    return sep, cover
