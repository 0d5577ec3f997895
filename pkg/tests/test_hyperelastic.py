import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodic_homog import (
    Ball,
    HyperelasticDensity,
    PeriodicCoefficient,
    PreconditionError,
    Quadratic,
    SampleConfig,
    SolverConfig,
    blowup_probe,
    cell_value,
    det_positivity_check,
    hyperelastic_integrand,
    shifted_integrand,
    whom_hyper,
)
from periodic_homog.hyperelastic import CenteredSet, ShiftedKernel, determinant, polar_grid, shift_kernel

CFG = SolverConfig(restarts=1, seed=0)


def _ball_points(rng, n, d, radius=1.0):
    z = rng.normal(size=(n, d, d))
    z /= np.linalg.norm(z.reshape(n, -1), axis=1)[:, None, None]
    r = radius * rng.uniform(0, 1, n) ** (1.0 / (d * d))
    return np.eye(d) + r[:, None, None] * z


@pytest.mark.parametrize("d", [1, 2, 3])
def test_determinant_matches_lapack(d, rng):
    a = rng.normal(size=(50, d, d))
    np.testing.assert_allclose(determinant(a), np.linalg.det(a), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_ball_around_identity_preserves_orientation(d, rng):
    det, ok = det_positivity_check(_ball_points(rng, 1000, d, 0.999999))
    assert ok.all() and det.min() > 0


def test_det_check_scalar_and_shape():
    assert det_positivity_check(np.diag([1.0, -1.0])) == (-1.0, False)
    with pytest.raises(ValueError):
        det_positivity_check(np.ones((2, 3)))


def test_density_closed_form():
    f = HyperelasticDensity(cbar=2.0, alpha=1.0, d=2)
    xi = np.eye(2) + 0.5 * np.array([[0.6, 0.0], [0.0, 0.8]])
    assert f.value(xi) == pytest.approx(0.25 + 2.0 * 0.5 / 0.5)
    assert f.value(np.eye(2)) == 0.0
    assert f.value(np.eye(2) + np.diag([1.0, 0.0])) == np.inf
    assert f.value(np.zeros((2, 2))) == np.inf


def test_alpha_below_one_rejected():
    with pytest.raises(ValueError):
        HyperelasticDensity(alpha=0.5)


def test_centered_set_gauge():
    C = CenteredSet(Ball(1.0, (2, 2)), np.eye(2))
    assert C.gauge(np.eye(2)) == 0.0
    assert C.gauge(np.eye(2) + np.diag([0.0, 0.5])) == pytest.approx(0.5)
    p = C.project((np.eye(2) + np.diag([2.0, 0.0]))[None])[0]
    np.testing.assert_allclose(p, np.eye(2) + np.diag([1.0, 0.0]))


def test_shift_kernel_keeps_quadratics():
    g = Quadratic(1.0, center=np.eye(2), shape=(2, 2))
    assert isinstance(shift_kernel(g, np.eye(2)), Quadratic)
    other = ShiftedKernel(g, np.eye(2))
    z = np.array([[0.1, 0.2], [0.3, -0.1]])
    assert other.value(z) == pytest.approx(g.value(z + np.eye(2)))


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_shifted_kernel_agrees_with_original(a, b):
    f = HyperelasticDensity(d=2)
    z = np.array([[a, b], [0.0, 0.0]]) / np.sqrt(2)
    assert f.shifted().value(z) == pytest.approx(f.value(z + np.eye(2)), rel=1e-12)


def test_direct_and_shifted_cell_values_agree():
    W = hyperelastic_integrand(PeriodicCoefficient.checkerboard(), d=2)
    W0 = shifted_integrand(W, check=False)
    s = np.array([[0.3, -0.2], [0.1, 0.0]])
    direct = cell_value(W, np.eye(2) + s, 1, cfg=CFG, resolution=2).value
    shifted = cell_value(W0, s, 1, cfg=CFG, resolution=2).value
    assert direct == pytest.approx(shifted, rel=1e-9)


def test_shifted_integrand_passes_checks():
    W = hyperelastic_integrand(d=2)
    W0, rep = shifted_integrand(W, sample_cfg=SampleConfig(n_directions=8), return_report=True)
    assert rep.all_pass
    with pytest.raises(TypeError):
        shifted_integrand(W0)


def test_shifted_integrand_flags_failed_report():
    W = hyperelastic_integrand(d=1, cbar=1e-4)
    with pytest.raises(PreconditionError):
        shifted_integrand(W, sample_cfg=SampleConfig(n_directions=4, n_levels=3, max_candidate_exponent=4))


def test_blowup_probe_diverges_with_positive_dets(rng):
    f = HyperelasticDensity(d=2)
    u = rng.normal(size=(2, 2))
    probe = blowup_probe(f, u / np.linalg.norm(u))
    assert probe.verdict == "infinite"
    assert probe.values[-1] > 1e6
    assert np.all(probe.dets > 0)
    with pytest.raises(ValueError):
        blowup_probe(f, 2 * np.eye(2))


def test_whom_hyper_branches():
    W = hyperelastic_integrand(PeriodicCoefficient.checkerboard(), d=2)
    pts = np.array([np.eye(2), np.eye(2) + np.diag([0.5, 0.0]), np.eye(2) + np.diag([1.0, 0.0]), np.zeros((2, 2))])
    out = whom_hyper(W, pts, n_max=1, cfg=CFG, resolution=2)
    assert out[0] == 0.0
    assert np.isfinite(out[1]) and out[1] > 0
    assert out[2] == np.inf and out[3] == np.inf


def test_polar_grid_layout():
    pts = polar_grid(2, radii=(0.0, 0.5), n_angles=4)
    assert len(pts) == 5
    np.testing.assert_allclose(np.linalg.norm((pts - np.eye(2)).reshape(5, -1), axis=1), [0, 0.5, 0.5, 0.5, 0.5])


def test_whom_hyper_boundary_points_built_on_sphere():
    W = hyperelastic_integrand(d=2)
    ring = polar_grid(2, (1.0,), 8)[1:]
    assert np.all(whom_hyper(W, ring, n_max=1, cfg=CFG, resolution=2) == np.inf)
