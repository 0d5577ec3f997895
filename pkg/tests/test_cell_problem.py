import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodic_homog import (
    Ball,
    Box,
    DoubleWell,
    InfeasibleMacroGradient,
    Integrand,
    PeriodicCoefficient,
    Quadratic,
    SolverConfig,
    cell_solves,
    cell_value,
    certified_schedule,
    duality_1d_oracle,
    eval_W,
    hW,
    hWn_sequence,
    tiled_start,
    values_over_r,
)

CFG = SolverConfig(restarts=2, seed=0)


def two_slope_oracle(a1, a2, xi, grid=200001):
    """Brute force over correctors with one slope per layer: the layer
    slopes s1, s2 average to xi and stay in [-1, 1]."""
    s1 = np.linspace(-1.0, 1.0, grid)
    s2 = 2 * xi - s1
    ok = np.abs(s2) <= 1.0
    return float(np.min(0.5 * (a1 * s1[ok] ** 2 + a2 * s2[ok] ** 2)))


@pytest.mark.parametrize("xi", [0.2, 0.5, -0.6])
def test_duality_oracle_matches_two_slope_brute_force(laminate_1d, xi):
    assert duality_1d_oracle(laminate_1d, xi) == pytest.approx(two_slope_oracle(1.0, 2.0, xi), abs=1e-6)
    assert duality_1d_oracle(laminate_1d, xi) == pytest.approx(4 / 3 * xi**2, rel=1e-4)


def test_duality_oracle_saturated_slope():
    # a in {1, 4}: the soft layer would need slope 8 xi / 5 > 1 at xi = 0.75
    W = Integrand(PeriodicCoefficient.laminate((1.0, 4.0)), Quadratic(1.0, Ball(1.0)))
    assert duality_1d_oracle(W, 0.75) == pytest.approx(two_slope_oracle(1.0, 4.0, 0.75), abs=1e-6)


def test_duality_oracle_refuses_nonconvex():
    W = Integrand(PeriodicCoefficient.constant(), DoubleWell())
    with pytest.raises(ValueError, match="convex"):
        duality_1d_oracle(W, 0.0)


@pytest.mark.parametrize("xi", [0.2, 0.5])
def test_laminate_cell_value_matches_oracle(laminate_1d, xi):
    v = hW(laminate_1d, xi, n_max=2, cfg=CFG, resolution=32)
    assert v == pytest.approx(4 / 3 * xi**2, rel=1e-6)


def test_cell_values_bound_oracle_from_above(laminate_1d):
    # the discrete Legendre grid puts the oracle ~1e-7 above the harmonic-mean value
    oracle = duality_1d_oracle(laminate_1d, 0.4)
    exact = 4 / 3 * 0.4**2
    assert abs(oracle - exact) <= 1e-6
    for res in cell_solves(laminate_1d, 0.4, n_max=3, cfg=CFG, resolution=8):
        assert res.value >= exact - 1e-9
        assert res.feasible


@pytest.mark.parametrize("shape", [(1, 1), (1, 2), (2, 2)])
def test_jensen_identity_for_constant_convex_kernel(shape, rng):
    d = shape[1]
    W = Integrand(PeriodicCoefficient.constant(1.0, d), Quadratic(1.0, Ball(1.0, shape)))
    xi = rng.normal(size=shape)
    xi *= 0.6 / np.linalg.norm(xi)
    res = 8 if d == 1 else 2
    v = cell_value(W, xi, 2, cfg=CFG, resolution=res).value
    assert v == pytest.approx(eval_W(W, np.zeros(d), xi), abs=1e-6)


def test_zero_restarts_evaluates_affine_field(laminate_1d):
    r = cell_value(laminate_1d, 0.5, 1, cfg=SolverConfig(restarts=0), resolution=8)
    assert r.value == pytest.approx(1.5 * 0.25)
    assert np.all(r.field.values == 0)


def test_infeasible_macro_gradient(laminate_1d):
    with pytest.raises(InfeasibleMacroGradient):
        cell_value(laminate_1d, 1.0, 1)


def test_fields_keep_element_gauges_feasible():
    W = Integrand(PeriodicCoefficient.checkerboard(), Quadratic(1.0, Box(1.0, (1, 2))))
    xi = np.array([[0.9, -0.4]])
    r = cell_value(W, xi, 1, cfg=CFG, resolution=4)
    grads = xi[None] + r.field.gradients()
    assert np.all(W.gauge(grads) <= max(CFG.tau_max, 0.9) + 1e-12)
    assert np.all(r.field.values[r.field.mesh.boundary] == 0)


@pytest.mark.parametrize("coef", [PeriodicCoefficient.laminate((1.0, 2.0), 2), PeriodicCoefficient.checkerboard()])
def test_tiling_subadditivity(coef):
    W = Integrand(coef, Quadratic(1.0, Ball(1.0, (1, 2))))
    xi = np.array([[0.3, 0.2]])
    one, two = cell_solves(W, xi, n_max=2, cfg=CFG, resolution=4)
    assert two.value <= one.value + 1e-9
    assert tiled_start(one, 2).shape == two.field.values.shape


def test_hw_nonincreasing_in_n_max(laminate_1d):
    _, results = hW(laminate_1d, 0.3, n_max=3, cfg=CFG, resolution=8, return_results=True)
    running = np.minimum.accumulate([r.value for r in results])
    assert np.all(np.diff(running) <= 0)


def test_values_over_r_nonincreasing(laminate_1d):
    vals = values_over_r(laminate_1d, 0.5, [0.05, 0.2, 1.0, np.inf], cfg=CFG, resolution=16)
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[0] > vals[-1]


def test_determinism(laminate_1d):
    a = cell_value(laminate_1d, 0.4, 2, cfg=SolverConfig(restarts=3, seed=7), resolution=8)
    b = cell_value(laminate_1d, 0.4, 2, cfg=SolverConfig(restarts=3, seed=7), resolution=8)
    assert a.value == b.value
    np.testing.assert_array_equal(a.field.values, b.field.values)


def test_truncated_sequence_monotone_and_bounded(barrier_1d):
    sched = certified_schedule(barrier_1d)
    seq, hw = hWn_sequence(barrier_1d, 0.4, [1, 2, 3, 4], sched, n_max=1, cfg=CFG, resolution=16, return_hw=True)
    assert np.all(np.diff(seq) >= -1e-12)
    assert seq[-1] <= hw + 1e-12


@settings(max_examples=15)
@given(st.floats(-0.9, 0.9))
def test_laminate_cell_value_never_below_oracle(xi):
    W = Integrand(PeriodicCoefficient.laminate((1.0, 2.0)), Quadratic(1.0, Ball(1.0)))
    v = cell_value(W, xi, 1, cfg=SolverConfig(restarts=1), resolution=8).value
    assert v >= 4 / 3 * xi**2 - 1e-9
    assert v <= 1.5 * xi**2 + 1e-9
