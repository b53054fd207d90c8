"""Volumes, polar duality, Mahler bounds, and the two Finsler densities."""

import math

import numpy as np
import pytest

from stathyp import convex
from stathyp.errors import DomainError, UnsupportedMethodError


def square():
    return convex.Polytope([[1, 1], [1, -1], [-1, 1], [-1, -1]])


class TestVolume:
    def test_unit_disk(self):
        assert convex.volume(convex.Ellipsoid([1.0, 1.0])).value == pytest.approx(math.pi)

    def test_square(self):
        assert convex.volume(square()).value == pytest.approx(4.0, abs=1e-12)

    def test_cross_polytope_3d(self):
        # L1 ball in R^3: 2^n / n! = 8/6
        assert convex.volume(convex.LpBall(3, 1.0)).value == pytest.approx(4.0 / 3.0)
        verts = np.vstack([np.eye(3), -np.eye(3)])
        assert convex.volume(convex.Polytope(verts)).value == pytest.approx(4.0 / 3.0)

    @pytest.mark.parametrize("dim,p", [(2, 1.0), (2, 3.0), (3, 1.5), (4, math.inf)])
    def test_monte_carlo_matches_exact(self, dim, p):
        body = convex.LpBall(dim, p)
        exact = convex.volume(body).value
        mc = convex.volume(body, "monte-carlo", n=100_000, seed=5)
        assert abs(mc.value - exact) <= 3.0 * mc.std_error

    def test_exact_unavailable_for_oracle(self):
        ball = convex.LpBall(2, 2.0)
        oracle = convex.OracleBody(2, ball.contains, ball.support, 1.0)
        with pytest.raises(UnsupportedMethodError):
            convex.volume(oracle)

    def test_exact_polytope_limited_to_3d(self):
        verts = np.vstack([np.eye(4), -np.eye(4)])
        with pytest.raises(UnsupportedMethodError):
            convex.volume(convex.Polytope(verts))

    def test_asymmetric_vertices_rejected(self):
        with pytest.raises(DomainError):
            convex.Polytope([[1, 0], [0, 1], [-1, -1], [2, 2]])


class TestPolar:
    def test_disk_self_polar(self):
        disk = convex.Ellipsoid([1.0, 1.0])
        pol = convex.polar(disk)
        assert np.allclose(pol.semi_axes, [1.0, 1.0])

    def test_square_to_diamond(self):
        pol = convex.polar(square())
        got = sorted(map(tuple, np.round(pol.vertices, 9)))
        assert got == [(-1.0, -0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]
        assert convex.volume(pol).value == pytest.approx(2.0, abs=1e-12)

    def test_ellipse_axes_reciprocal(self):
        pol = convex.polar(convex.Ellipsoid([2.0, 0.5]))
        assert np.allclose(pol.semi_axes, [0.5, 2.0])

    def test_lp_duality(self):
        assert convex.polar(convex.LpBall(2, 1.0)).p == math.inf
        assert convex.polar(convex.LpBall(2, math.inf)).p == 1.0
        assert convex.polar(convex.LpBall(3, 3.0)).p == pytest.approx(1.5)

    @pytest.mark.parametrize("body", [
        square(),
        convex.Ellipsoid([2.0, 0.5]),
        convex.LpBall(2, 3.0),
        convex.random_symmetric_polytope(3, seed=12),
    ])
    def test_bipolar_membership(self, body):
        back = convex.polar(convex.polar(body))
        rng = np.random.default_rng(1)
        xs = rng.uniform(-1.5, 1.5, size=(10_000, body.dim))
        a = body.contains(xs)
        b = back.contains(xs)
        # disagreement only possible within a hair of the boundary
        disagree = xs[a != b]
        assert len(disagree) <= 3

    def test_oracle_polar_volume(self):
        # polar of an oracle-wrapped square must have the diamond's volume
        sq = square()
        oracle = convex.OracleBody(2, sq.contains, sq.support, sq.bounding_radius())
        pol = convex.polar(oracle)
        mc = convex.volume(pol, "monte-carlo", n=50_000, seed=2)
        assert abs(mc.value - 2.0) <= 3.0 * mc.std_error

    def test_monotone_under_inclusion(self):
        small = convex.Ellipsoid([1.0, 0.5])
        large = convex.Ellipsoid([2.0, 1.0])
        assert convex.volume(small).value < convex.volume(large).value
        rng = np.random.default_rng(3)
        xs = rng.uniform(-3, 3, size=(5000, 2))
        # polar reverses inclusion
        ps, pl = convex.polar(small), convex.polar(large)
        inside_pl = pl.contains(xs)
        assert np.all(ps.contains(xs[inside_pl]))


class TestMahler:
    def test_disk(self):
        report = convex.mahler(convex.Ellipsoid([1.0, 1.0]))
        assert report.value == pytest.approx(math.pi ** 2, abs=1e-6)
        # the round body achieves the upper bound
        assert report.value == pytest.approx(report.upper_bound, abs=1e-9)
        assert report.ok

    def test_square(self):
        report = convex.mahler(square())
        assert report.value == pytest.approx(8.0, abs=1e-9)
        assert report.lower_bound == pytest.approx(math.pi ** 2 / 2.0)
        assert report.lower_bound <= report.value <= report.upper_bound

    @pytest.mark.parametrize("dim", [2, 3])
    def test_random_polytopes_within_bounds(self, dim):
        for seed in range(100):
            body = convex.random_symmetric_polytope(dim, seed=seed)
            assert convex.mahler(body).ok

    def test_identity_with_densities(self):
        # Mahler volume equals (unit-ball volume)^2 * g / f
        for body in (square(), convex.Ellipsoid([1.5, 0.25]), convex.LpBall(2, 4.0),
                     convex.random_symmetric_polytope(2, seed=5)):
            pair = convex.densities(body)
            eps_n = convex.unit_ball_volume(body.dim)
            expected = eps_n ** 2 * pair.holmes_thompson / pair.busemann
            assert convex.mahler(body).value == pytest.approx(expected, rel=1e-9)


class TestDensities:
    def test_euclidean_ball(self):
        ball = convex.Ellipsoid([1.0, 1.0])
        assert convex.busemann_density(ball).value == pytest.approx(1.0)
        assert convex.holmes_thompson_density(ball).value == pytest.approx(1.0)

    def test_sup_norm_plane(self):
        body = convex.LpBall(2, math.inf)
        assert convex.busemann_density(body).value == pytest.approx(math.pi / 4.0)
        assert convex.holmes_thompson_density(body).value == pytest.approx(2.0 / math.pi)
        assert convex.density_ratio(body)[0] == pytest.approx(math.pi ** 2 / 8.0)

    def test_l1_plane(self):
        body = convex.LpBall(2, 1.0)
        assert convex.busemann_density(body).value == pytest.approx(math.pi / 2.0)
        assert convex.holmes_thompson_density(body).value == pytest.approx(4.0 / math.pi)

    def test_ellipsoids_are_ratio_one(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            dim = int(rng.integers(2, 5))
            axes = np.exp(rng.uniform(-1.5, 1.5, size=dim))
            pair = convex.densities(convex.Ellipsoid(axes))
            assert pair.ratio == pytest.approx(1.0, abs=1e-12)

    def test_sandwich(self):
        bodies = [square(), convex.LpBall(2, 1.0), convex.LpBall(3, 5.0),
                  convex.Ellipsoid([3.0, 0.2])]
        bodies += [convex.random_symmetric_polytope(2, seed=s) for s in range(20)]
        bodies += [convex.random_symmetric_polytope(3, seed=s) for s in range(20)]
        for body in bodies:
            ratio, _ = convex.density_ratio(body)
            cap = body.dim ** (body.dim / 2.0)
            assert 1.0 - 1e-9 <= ratio <= cap + 1e-9
