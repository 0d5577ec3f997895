import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

from periodic_homog import (
    Ball,
    Box,
    DimensionMismatch,
    NotCompactlyContained,
    Polytope,
    PreconditionError,
    constraint_from_dict,
    minimal_scale_containing,
    neighborhood_inclusion_check,
)
from periodic_homog.geometry import random_directions

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def square_polytope():
    # |x| + |y| <= 1 on 1x2 matrices plus one tilted face
    normals = [[[1, 1]], [[1, -1]], [[-1, 1]], [[-1, -1]], [[2, 0.5]]]
    return Polytope(normals, [1, 1, 1, 1, 1.5], shape=(1, 2))


SETS = [
    Ball(1.0),
    Ball(2.0, (2, 2)),
    Box([[1.0, 0.5]], (1, 2)),
    Box(1.0, (2, 2)),
    square_polytope(),
]


class TestGaugeValues:
    def test_ball_centre(self):
        assert Ball(1.0).gauge(0.0) == 0.0

    def test_ball_scaled(self):
        assert Ball(2.0, (1, 2)).gauge(np.array([[0.6, 0.8]])) == pytest.approx(0.5)

    def test_box(self):
        assert Box(1.0, (2, 2)).gauge(np.array([[0.7, -0.2], [0.1, 0.0]])) == pytest.approx(0.7)

    def test_polytope_formula(self):
        P = square_polytope()
        xi = np.array([[0.3, 0.1]])
        expected = max(0.4, 0.2, 0.0, 0.0, (0.6 + 0.05) / 1.5)
        assert P.gauge(xi) == pytest.approx(expected)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Ball(1.0, (2, 2)).gauge(np.zeros((1, 2)))


class TestDistance:
    def test_ball_interior(self):
        assert Ball(1.0).dist_to_closure(0.3) == 0.0

    def test_ball_radial(self):
        assert Ball(1.0).dist_to_closure(1.5) == pytest.approx(0.5)

    def test_box_against_grid_of_boundary_points(self):
        # brute force over a fine grid of boundary points of the square [-1, 1]^2
        C = Box(1.0, (1, 2))
        s = np.linspace(-1, 1, 4001)
        edges = np.concatenate(
            [np.stack([s, np.ones_like(s)], 1), np.stack([s, -np.ones_like(s)], 1),
             np.stack([np.ones_like(s), s], 1), np.stack([-np.ones_like(s), s], 1)]
        )
        for xi in ([2.0, 0.0], [1.7, -2.2], [-3.0, 0.4]):
            brute = np.min(np.linalg.norm(edges - np.array(xi), axis=1))
            assert C.dist_to_closure(np.array([xi])) == pytest.approx(brute, abs=1e-3)
        assert C.dist_to_closure(np.array([[2.0, 0.0]])) == pytest.approx(1.0)

    def test_polytope_against_constrained_minimisation(self, rng):
        P = square_polytope()
        A = P.a.reshape(len(P.b), -1)
        for _ in range(10):
            xi = rng.uniform(-3, 3, 2)
            cons = {"type": "ineq", "fun": lambda y: P.b - A @ y, "jac": lambda y: -A}
            res = minimize(lambda y: np.sum((y - xi) ** 2), np.zeros(2), jac=lambda y: 2 * (y - xi),
                           constraints=[cons], method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
            assert P.dist_to_closure(xi.reshape(1, 2)) == pytest.approx(np.sqrt(res.fun), abs=1e-6)


@pytest.mark.parametrize("C", SETS, ids=lambda c: c.kind + str(c.shape))
class TestLaws:
    def test_homogeneity(self, C, rng):
        xi = rng.standard_normal((200,) + C.shape)
        t = rng.uniform(0, 2, 200)
        lhs = C.gauge(t[:, None, None] * xi)
        assert np.max(np.abs(lhs - t * C.gauge(xi))) <= 1e-12

    def test_segment_principle(self, C, rng):
        xi = C.boundary_point(random_directions(C.shape, 100, rng)) * rng.uniform(0, 1, 100)[:, None, None]
        t = rng.uniform(0, 1, 100)
        g = C.gauge(t[:, None, None] * xi)
        assert np.all(g < 1.0)
        assert np.allclose(g, t * C.gauge(xi), atol=1e-12)

    def test_subadditive(self, C, rng):
        a = rng.standard_normal((200,) + C.shape)
        b = rng.standard_normal((200,) + C.shape)
        assert np.all(C.gauge(a + b) <= C.gauge(a) + C.gauge(b) + 1e-12)

    def test_distance_zero_iff_inside(self, C, rng):
        xi = rng.uniform(-1.5, 1.5, (300,) + C.shape) * C.radius
        d = C.dist_to_closure(xi)
        inside = C.gauge(xi) <= 1.0
        assert np.all(d[inside] <= 1e-10)
        assert np.all(d[~inside] > 0)

    def test_distance_lipschitz(self, C, rng):
        a = rng.standard_normal((200,) + C.shape) * 2
        b = rng.standard_normal((200,) + C.shape) * 2
        diff = np.linalg.norm((a - b).reshape(200, -1), axis=1)
        assert np.all(np.abs(C.dist_to_closure(a) - C.dist_to_closure(b)) <= diff + 1e-9)

    def test_radius_and_inradius(self, C, rng):
        u = random_directions(C.shape, 500, rng)
        bnd = C.boundary_point(u)
        norms = np.linalg.norm(bnd.reshape(500, -1), axis=1)
        assert norms.max() <= C.radius + 1e-9
        assert norms.min() >= C.inradius - 1e-9
        assert C.diameter <= 2 * C.radius + 1e-9

    def test_max_step_reaches_level(self, C, rng):
        z = C.boundary_point(random_directions(C.shape, 50, rng)) * 0.3
        dz = rng.standard_normal((50,) + C.shape)
        a = C.max_step(z, dz, 0.9)
        assert np.allclose(C.gauge(z + a[:, None, None] * dz), 0.9, atol=1e-9)

    def test_round_trip(self, C):
        assert constraint_from_dict(C.to_dict()).to_dict() == C.to_dict()


@given(arrays(float, (1, 2), elements=finite), arrays(float, (1, 2), elements=finite), st.floats(0.05, 0.99))
def test_box_max_step_never_overshoots(z, dz, tau):
    C = Box([[1.0, 0.5]], (1, 2))
    z = z / max(1.0, C.gauge(z) / (0.5 * tau))
    a = C.max_step(z[None], dz[None], tau)[0]
    if np.isfinite(a):
        assert C.gauge(z + a * dz) <= tau + 1e-9


@given(arrays(float, (2, 2), elements=finite), arrays(float, (2, 2), elements=finite))
def test_ball_max_step_never_overshoots(z, dz):
    C = Ball(1.0, (2, 2))
    z = z / max(1.0, 2.0 * C.gauge(z))
    a = C.max_step(z[None], dz[None], 0.95)[0]
    if np.isfinite(a):
        assert C.gauge(z + a * dz) <= 0.95 + 1e-9
    else:
        assert np.allclose(dz, 0)


class TestMinimalScale:
    def test_origin(self):
        assert minimal_scale_containing(Ball(1.0), [0.0]) == 0.0

    def test_max_of_gauges(self):
        assert minimal_scale_containing(Ball(1.0), [0.3, -0.8]) == pytest.approx(0.8)

    def test_boundary_point_rejected(self):
        with pytest.raises(NotCompactlyContained):
            minimal_scale_containing(Ball(1.0), [0.2, 1.0])


class TestNeighborhoodInclusion:
    def test_ball(self, rng):
        samples = rng.uniform(-2, 2, 1000)
        assert neighborhood_inclusion_check(Ball(1.0), 0.5, 0.2, samples)

    def test_origin(self):
        assert neighborhood_inclusion_check(Box(1.0, (2, 2)), 0.5, 0.1, np.zeros((1, 2, 2)))

    def test_far_samples_are_vacuous(self, rng):
        C = square_polytope()
        rho, r = 0.5, 0.2
        u = random_directions(C.shape, 200, rng)
        # points just outside (1+r) C̄: gauge 1 + 1.01 r
        far = C.boundary_point(u) * (1 + 1.01 * r)
        assert np.all(C.dist_to_closure(far) > rho * r / 2)
        assert neighborhood_inclusion_check(C, rho, r, far)

    def test_rho_too_large(self):
        with pytest.raises(PreconditionError):
            neighborhood_inclusion_check(Ball(1.0), 1.0, 0.2, [0.0])
