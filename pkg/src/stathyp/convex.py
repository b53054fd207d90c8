"""Convex-body volumes, polar duals, Mahler volume, and Finsler densities.

Bodies are centrally symmetric convex sets containing the origin in their
interior, given as symmetric polytopes (vertex lists), axis-aligned
ellipsoids, p-norm balls, or membership/support oracles.  Exact volumes are
available for ellipsoids and p-balls in any dimension and for polytopes up to
dimension 3 (facet decomposition); everything else falls back to rejection
sampling in the support-function bounding box.

The two Finsler volume densities of a norm with unit ball B are

    busemann        f = vol(unit ball) / vol(B)
    holmes-thompson g = vol(polar of B) / vol(unit ball)

and their ratio f/g equals vol(Ball)^2 / Mahler(B), which the classical
bounds on the Mahler volume place in [1, n^(n/2)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DomainError, ParameterError, UnsupportedMethodError
from .rng import CHUNK, substream

_SYM_TOL = 1e-9


def unit_ball_volume(n: int) -> float:
    """Lebesgue volume of the Euclidean unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def lp_ball_volume(n: int, p: float) -> float:
    """Closed form 2^n Gamma(1 + 1/p)^n / Gamma(1 + n/p); p may be inf."""
    if math.isinf(p):
        return 2.0 ** n
    return 2.0 ** n * math.gamma(1.0 + 1.0 / p) ** n / math.gamma(1.0 + n / p)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    n_samples: int

    @property
    def exact(self) -> bool:
        return self.std_error == 0.0


class ConvexBody:
    """Base class; subclasses must be centrally symmetric with 0 interior."""

    dim: int

    def contains(self, xs: np.ndarray) -> np.ndarray:
        """Membership of rows of ``xs`` (m, dim) -> bool (m,)."""
        raise NotImplementedError

    def support(self, xi: np.ndarray) -> float:
        """Support function max_{v in body} xi . v."""
        raise NotImplementedError

    def bounding_radius(self) -> float:
        return max(self.support(e) for e in np.eye(self.dim)) * math.sqrt(self.dim)

    def exact_volume(self) -> float:
        raise UnsupportedMethodError(
            f"no exact volume for {type(self).__name__}; use the monte-carlo method")

    def describe(self) -> str:
        return type(self).__name__


class Polytope(ConvexBody):
    """Convex hull of a centrally symmetric vertex list."""

    def __init__(self, vertices: np.ndarray):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2:
            raise ParameterError("need a (k, dim) vertex array with k >= 2")
        self.dim = v.shape[1]
        self.vertices = v
        self._check_symmetry()
        try:
            self.hull = ConvexHull(v)
        except Exception as exc:
            raise ParameterError(f"degenerate vertex set: {exc}") from exc
        # facet inequalities A x + b <= 0
        self._A = self.hull.equations[:, :-1]
        self._b = self.hull.equations[:, -1]
        if np.any(self._b >= 0):
            raise DomainError("the origin must be interior to the polytope")

    def _check_symmetry(self):
        scale = np.abs(self.vertices).max()
        for v in self.vertices:
            if np.min(np.abs(self.vertices + v).max(axis=1)) > _SYM_TOL * max(scale, 1.0):
                raise DomainError("vertex list is not centrally symmetric")

    def contains(self, xs: np.ndarray) -> np.ndarray:
        return np.all(xs @ self._A.T + self._b <= _SYM_TOL, axis=1)

    def support(self, xi: np.ndarray) -> float:
        return float(np.max(self.vertices @ xi))

    def bounding_radius(self) -> float:
        return float(np.sqrt((self.vertices ** 2).sum(axis=1)).max())

    def exact_volume(self) -> float:
        if self.dim > 3:
            raise UnsupportedMethodError("exact polytope volume is limited to dim <= 3")
        return float(self.hull.volume)

    def polar(self) -> "Polytope":
        # facet (a . x <= h, h > 0) of the body <-> vertex a/h of the polar
        verts = -self._A / self._b[:, None]
        return Polytope(_dedupe_rows(verts))

    def describe(self) -> str:
        return f"polytope(dim={self.dim},k={len(self.vertices)})"


def _dedupe_rows(rows: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out: list[np.ndarray] = []
    for r in rows:
        if not any(np.allclose(r, o, atol=tol * (1 + np.abs(o).max())) for o in out):
            out.append(r)
    return np.asarray(out)


class Ellipsoid(ConvexBody):
    def __init__(self, semi_axes):
        a = np.asarray(semi_axes, dtype=np.float64)
        if a.ndim != 1 or np.any(a <= 0):
            raise ParameterError("semi-axes must be a vector of positive reals")
        self.dim = len(a)
        self.semi_axes = a

    def contains(self, xs: np.ndarray) -> np.ndarray:
        return ((xs / self.semi_axes) ** 2).sum(axis=1) <= 1.0 + _SYM_TOL

    def support(self, xi: np.ndarray) -> float:
        return float(np.sqrt(((xi * self.semi_axes) ** 2).sum()))

    def bounding_radius(self) -> float:
        return float(self.semi_axes.max())

    def exact_volume(self) -> float:
        return unit_ball_volume(self.dim) * float(np.prod(self.semi_axes))

    def polar(self) -> "Ellipsoid":
        return Ellipsoid(1.0 / self.semi_axes)

    def describe(self) -> str:
        return f"ellipsoid(axes={tuple(self.semi_axes)})"


class LpBall(ConvexBody):
    def __init__(self, dim: int, p: float):
        if dim < 1:
            raise ParameterError(f"dimension must be positive, got {dim}")
        if not p >= 1.0:
            raise ParameterError(f"p-ball needs p >= 1, got {p}")
        self.dim = int(dim)
        self.p = float(p)

    def contains(self, xs: np.ndarray) -> np.ndarray:
        a = np.abs(xs)
        if math.isinf(self.p):
            return a.max(axis=1) <= 1.0 + _SYM_TOL
        return (a ** self.p).sum(axis=1) <= 1.0 + _SYM_TOL

    def support(self, xi: np.ndarray) -> float:
        # support of the p-ball is the dual q-norm
        q = _conjugate(self.p)
        a = np.abs(xi)
        if math.isinf(q):
            return float(a.max())
        return float((a ** q).sum() ** (1.0 / q))

    def bounding_radius(self) -> float:
        return 1.0

    def exact_volume(self) -> float:
        return lp_ball_volume(self.dim, self.p)

    def polar(self) -> "LpBall":
        return LpBall(self.dim, _conjugate(self.p))

    def describe(self) -> str:
        return f"lp-ball(dim={self.dim},p={self.p})"


def _conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


class OracleBody(ConvexBody):
    def __init__(self, dim: int, membership: Callable[[np.ndarray], np.ndarray],
                 support: Callable[[np.ndarray], float], bounding_radius: float,
                 label: str = "oracle"):
        self.dim = int(dim)
        self._membership = membership
        self._support = support
        self._radius = float(bounding_radius)
        self._label = label

    def contains(self, xs: np.ndarray) -> np.ndarray:
        return np.asarray(self._membership(xs), dtype=bool)

    def support(self, xi: np.ndarray) -> float:
        return float(self._support(xi))

    def bounding_radius(self) -> float:
        return self._radius

    def describe(self) -> str:
        return f"oracle({self._label},dim={self.dim})"


def polar(body: ConvexBody) -> ConvexBody:
    """Polar dual {xi : xi . v <= 1 for all v in the body}.

    Polytopes dualize to polytopes (facets <-> vertices), so exact volume
    survives polarity; ellipsoids and p-balls have closed-form duals; any
    other body becomes a support-function membership oracle.
    """
    if isinstance(body, (Polytope, Ellipsoid, LpBall)):
        return body.polar()

    def membership(xs: np.ndarray) -> np.ndarray:
        return np.asarray([body.support(x) <= 1.0 + _SYM_TOL for x in xs])

    # the polar contains the ball of radius 1/R when the body sits inside
    # radius R; its own bounding radius is governed by the inradius of body
    r_in = _inradius_lower_bound(body)
    return OracleBody(body.dim, membership,
                      support=lambda xi: _polar_support(body, xi),
                      bounding_radius=1.0 / r_in,
                      label=f"polar-of-{body.describe()}")


def _inradius_lower_bound(body: ConvexBody, probes: int = 64) -> float:
    rng = substream(0, 0x1AD)
    best = math.inf
    for _ in range(probes):
        u = rng.normal(size=body.dim)
        u /= np.sqrt((u * u).sum())
        best = min(best, body.support(u))
    return best


def _polar_support(body: ConvexBody, xi: np.ndarray, steps: int = 60) -> float:
    # support of the polar in direction xi = 1 / gauge of body at xi,
    # found by bisecting the membership predicate along the ray
    xi = np.asarray(xi, dtype=np.float64)
    norm = float(np.sqrt((xi * xi).sum()))
    if norm == 0.0:
        return 0.0
    lo, hi = 0.0, body.bounding_radius() * 1.001
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if bool(body.contains((mid * xi / norm)[None, :])[0]):
            lo = mid
        else:
            hi = mid
    return norm / max(lo, 1e-300)


def volume(body: ConvexBody, method: str = "exact", n: int = 200_000,
           seed: int = 0) -> VolumeEstimate:
    """Lebesgue volume of the body.

    ``method="exact"`` uses the closed form or facet decomposition and raises
    UnsupportedMethodError where none exists; ``method="monte-carlo"`` does
    rejection sampling in the support bounding box with ``n`` samples and
    reports the binomial standard error.
    """
    if method == "exact":
        return VolumeEstimate(body.exact_volume(), 0.0, 0)
    if method != "monte-carlo":
        raise ParameterError(f"unknown volume method {method!r}")
    if n < 1:
        raise ParameterError(f"need at least one sample, got {n}")
    half = np.asarray([body.support(e) for e in np.eye(body.dim)])
    box = float(np.prod(2.0 * half))
    hits = 0
    for i, start in enumerate(range(0, n, CHUNK)):
        m = min(start + CHUNK, n) - start
        rng = substream(seed, 0xB0D7, i)
        xs = rng.uniform(-half, half, size=(m, body.dim))
        hits += int(body.contains(xs).sum())
    p_hat = hits / n
    se = box * math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n) / n)
    return VolumeEstimate(box * p_hat, se, n)


@dataclass(frozen=True)
class MahlerReport:
    value: float
    std_error: float
    lower_bound: float
    upper_bound: float
    lower_violated: bool
    upper_violated: bool

    @property
    def ok(self) -> bool:
        return not (self.lower_violated or self.upper_violated)


def mahler(body: ConvexBody, method: str = "exact", n: int = 200_000,
           seed: int = 0) -> MahlerReport:
    """Mahler volume vol(body) * vol(polar) with the classical two-sided bounds.

    Violations are flagged only beyond three combined standard errors, so the
    exact path flags any true violation.
    """
    v1 = volume(body, method, n, seed)
    v2 = volume(polar(body), method, n, seed + 1 if method == "monte-carlo" else seed)
    value = v1.value * v2.value
    # first-order error propagation for the product
    se = math.hypot(v1.std_error * v2.value, v2.std_error * v1.value)
    n_dim = body.dim
    eps_n = unit_ball_volume(n_dim)
    lower = eps_n ** 2 / n_dim ** (n_dim / 2.0)
    upper = eps_n ** 2
    return MahlerReport(
        value=value,
        std_error=se,
        lower_bound=lower,
        upper_bound=upper,
        lower_violated=value < lower - 3.0 * se - _SYM_TOL,
        upper_violated=value > upper + 3.0 * se + _SYM_TOL,
    )


def busemann_density(body: ConvexBody, method: str = "exact", n: int = 200_000,
                     seed: int = 0) -> VolumeEstimate:
    """Euclidean-ball volume over the volume of the norm's unit ball."""
    v = volume(body, method, n, seed)
    eps_n = unit_ball_volume(body.dim)
    return VolumeEstimate(eps_n / v.value, eps_n * v.std_error / v.value ** 2, v.n_samples)


def holmes_thompson_density(body: ConvexBody, method: str = "exact",
                            n: int = 200_000, seed: int = 0) -> VolumeEstimate:
    """Volume of the polar unit ball over the Euclidean-ball volume."""
    v = volume(polar(body), method, n, seed)
    eps_n = unit_ball_volume(body.dim)
    return VolumeEstimate(v.value / eps_n, v.std_error / eps_n, v.n_samples)


@dataclass(frozen=True)
class DensityPair:
    busemann: float
    holmes_thompson: float
    ratio: float
    ratio_std_error: float

    def __post_init__(self):
        if not (self.busemann > 0 and self.holmes_thompson > 0):
            raise DomainError("densities must be positive")


def densities(body: ConvexBody, method: str = "exact", n: int = 200_000,
              seed: int = 0) -> DensityPair:
    """Both volume densities of the norm with unit ball ``body``."""
    f = busemann_density(body, method, n, seed)
    g = holmes_thompson_density(body, method, n, seed + 1 if method == "monte-carlo" else seed)
    ratio = f.value / g.value
    se = ratio * math.hypot(
        f.std_error / f.value if f.value else 0.0,
        g.std_error / g.value if g.value else 0.0,
    )
    return DensityPair(f.value, g.value, ratio, se)


def density_ratio(body: ConvexBody, method: str = "exact", n: int = 200_000,
                  seed: int = 0) -> tuple[float, float]:
    """(f/g, combined standard error) for the two densities of the body."""
    pair = densities(body, method, n, seed)
    return pair.ratio, pair.ratio_std_error


def random_symmetric_polytope(dim: int, seed: int, k_min: int = 4, k_max: int = 40) -> Polytope:
    """Symmetrized convex hull of k uniform sphere points, k in [k_min, k_max]."""
    rng = substream(seed, 0x7017)
    k = int(rng.integers(k_min, k_max + 1))
    g = rng.normal(size=(k, dim))
    g /= np.sqrt((g * g).sum(axis=1))[:, None]
    return Polytope(np.vstack([g, -g]))
