"""Products of model spaces with the sup metric.

Points are tuples of component points.  Geodesics in a sup metric are far
from unique; this model fixes the canonical straight-line choice, where each
component moves along its own geodesic at constant speed proportional to its
component distance.  That path has unit speed for the sup metric and reduces
to the ordinary straight segment when the components are normed lines.

Sphere sampling draws a Euclidean-uniform speed profile (the coordinatewise
absolute value of a Gaussian direction, normalized by its maximum) together
with an independent uniform direction in each component; on a product of
lines this agrees with the uniform-direction measure on the sup-norm sphere.
Components must have continuous geodesics, so trees cannot be factors.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DomainError, ParameterError
from .base import ModelSpace, RayBundle


class ProductRays(RayBundle):
    def __init__(self, bundles, speeds):
        self.bundles = bundles    # one RayBundle per component
        self.speeds = speeds      # (n, m), rows have max 1

    @property
    def size(self) -> int:
        return self.speeds.shape[0]

    def points_at(self, t):
        t = np.asarray(t, dtype=np.float64)
        return tuple(b.points_at(t * self.speeds[:, j]) for j, b in enumerate(self.bundles))


class SupProduct(ModelSpace):
    kind = "sup-product"

    def __init__(self, components: Sequence[ModelSpace], h: float | None = None):
        if len(components) < 2:
            raise ParameterError("a product needs at least two components")
        for comp in components:
            if comp.atomic:
                raise ParameterError(
                    f"sup products need continuous factors, got {comp.kind}")
        self.components = tuple(components)
        # ball volume is the product of factor volumes, so exponents add
        self.h = sum(c.h for c in components) if h is None else float(h)

    def describe(self) -> str:
        inner = ",".join(c.describe() for c in self.components)
        return f"sup-product(h={self.h},[{inner}])"

    def basepoint(self) -> tuple:
        return tuple(c.basepoint() for c in self.components)

    def validate_point(self, p) -> None:
        if not isinstance(p, tuple) or len(p) != len(self.components):
            raise DomainError(
                f"product points are {len(self.components)}-tuples of factor points")
        for comp, pi in zip(self.components, p):
            comp.validate_point(pi)

    def distance(self, u, v) -> float:
        self.validate_point(u)
        self.validate_point(v)
        return max(c.distance(ui, vi) for c, ui, vi in zip(self.components, u, v))

    def geodesic_point(self, u, v, t: float) -> tuple:
        self.validate_point(u)
        self.validate_point(v)
        dists = [c.distance(ui, vi) for c, ui, vi in zip(self.components, u, v)]
        total = max(dists)
        if total == 0.0:
            raise DomainError("degenerate ray: endpoints coincide")
        if t < 0:
            raise ParameterError(f"ray time must be nonnegative, got {t}")
        out = []
        for comp, ui, vi, di in zip(self.components, u, v, dists):
            if di == 0.0:
                out.append(ui)
            else:
                out.append(comp.geodesic_point(ui, vi, t * di / total))
        return tuple(out)

    def geodesic_points(self, u, v, ts: np.ndarray) -> tuple:
        self.validate_point(u)
        self.validate_point(v)
        dists = [c.distance(ui, vi) for c, ui, vi in zip(self.components, u, v)]
        total = max(dists)
        if total == 0.0:
            raise DomainError("degenerate ray: endpoints coincide")
        ts = np.asarray(ts, dtype=np.float64)
        out = []
        for comp, ui, vi, di in zip(self.components, u, v, dists):
            if di == 0.0:
                out.append(comp.batch_concat([comp.singleton(ui)] * len(ts)))
            else:
                out.append(comp.geodesic_points(ui, vi, ts * (di / total)))
        return tuple(out)

    # -- batches: tuples of component batches --------------------------------

    def batch_size(self, batch) -> int:
        return self.components[0].batch_size(batch[0])

    def batch_get(self, batch, i: int) -> tuple:
        return tuple(c.batch_get(b, i) for c, b in zip(self.components, batch))

    def batch_concat(self, batches) -> tuple:
        return tuple(
            c.batch_concat([b[j] for b in batches])
            for j, c in enumerate(self.components))

    def singleton(self, p) -> tuple:
        self.validate_point(p)
        return tuple(c.singleton(pi) for c, pi in zip(self.components, p))

    def distance_many(self, U, V) -> np.ndarray:
        per = [c.distance_many(ui, vi) for c, ui, vi in zip(self.components, U, V)]
        return np.max(np.stack(per, axis=0), axis=0)

    def cross_distance(self, U, V) -> np.ndarray:
        per = [c.cross_distance(ui, vi) for c, ui, vi in zip(self.components, U, V)]
        return np.max(np.stack(per, axis=0), axis=0)

    # -- sampling -----------------------------------------------------------

    def rays_chunk(self, x, count, rng, horizon) -> ProductRays:
        self.validate_point(x)
        m = len(self.components)
        g = np.abs(rng.normal(size=(count, m)))
        top = g.max(axis=1)
        fix = top == 0.0
        if np.any(fix):
            g[fix] = 1.0
            top[fix] = 1.0
        speeds = g / top[:, None]
        bundles = [
            comp.rays_chunk(xi, count, rng, horizon)
            for comp, xi in zip(self.components, x)
        ]
        return ProductRays(bundles, speeds)
