"""Barrier stored energies on the ball ``B(I) = {xi : |xi - I| < 1}``.

``f(xi) = g(xi) + h(|xi - I|)`` with a finite continuous ``g`` and a barrier
profile ``h(t) = cbar * t^alpha / (1 - t^alpha)``, which dominates
``cbar * (1/(1 - t^alpha) - 1)`` and diverges at ``t = 1``. Every ``xi`` in
``B(I)`` has ``det xi > 0``, so the barrier enforces orientation
preservation.

Since ``0`` is not in ``B(I)``, cell problems are solved for the shifted
integrand ``W_0(x, xi) = W(x, xi + I)`` on the unit ball centred at 0.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_batch, check_matrix, frobenius, unbatch
from .envelopes import RadialProbe, _classify, default_ladder, zhw
from .exceptions import DimensionMismatch, PreconditionError
from .geometry import Ball, ConstraintSet
from .integrand import (
    Barrier,
    DensityKernel,
    Integrand,
    PeriodicCoefficient,
    Quadratic,
    SampleConfig,
    assumption_report,
)


class CenteredSet(ConstraintSet):
    """``center + closure(base)``; gauges are taken relative to ``center``.

    Lets constrained solves run directly on sets that do not contain 0.
    """

    kind = "centered"

    def __init__(self, base: ConstraintSet, center):
        super().__init__(base.shape)
        self.base = base
        self.center = np.asarray(center, dtype=float).reshape(base.shape)

    def _gauge(self, batch):
        return self.base._gauge(batch - self.center)

    def _dist(self, batch):
        return self.base._dist(batch - self.center)

    def project(self, batch):
        return self.center + self.base.project(batch - self.center)

    def gauge_subgradient(self, batch):
        return self.base.gauge_subgradient(batch - self.center)

    def max_step(self, z, dz, tau):
        return self.base.max_step(z - self.center, dz, tau)

    @property
    def radius(self):
        return self.base.radius + float(np.linalg.norm(self.center))

    @property
    def diameter(self):
        return self.base.diameter

    @property
    def inradius(self):
        return self.base.inradius

    def to_dict(self):
        return {"shape": "centered", "base": self.base.to_dict(), "center": self.center.tolist()}


class ShiftedKernel(DensityKernel):
    """``xi -> g(xi + shift)`` without a domain of its own."""

    def __init__(self, g: DensityKernel, shift):
        super().__init__(None, g.shape)
        self.g = g
        self.shift = np.asarray(shift, dtype=float).reshape(g.shape)
        self.convex = g.convex

    def _value(self, batch):
        return self.g._value(batch + self.shift)

    def _grad(self, batch):
        return self.g._grad(batch + self.shift)

    def upper_bound(self, t, C):
        return self.g.upper_bound(1.0, Ball(t * C.radius + float(np.linalg.norm(self.shift)), self.shape))

    def to_dict(self):
        return {"variant": "shifted", "g": self.g.to_dict(), "shift": self.shift.tolist()}


def shift_kernel(g: DensityKernel, shift):
    """``g(. + shift)``; quadratics stay quadratics (with a moved centre)."""
    if isinstance(g, Quadratic) and g.domain is None:
        return Quadratic(g.weight, center=g.center - np.asarray(shift, dtype=float).reshape(g.shape), shape=g.shape)
    return ShiftedKernel(g, shift)


class HyperelasticDensity(DensityKernel):
    """``g(xi) + h(|xi - I|)``, finite exactly on the open ball ``|xi - I| < 1``.

    Parameters
    ----------
    g : DensityKernel, optional
        Finite continuous part, ``|xi - I|^2`` by default.
    cbar, alpha : float
        Barrier constants; ``alpha >= 1``.
    d : int
        Dimension (``m = d``).
    """

    open_domain = True

    def __init__(self, g: DensityKernel | None = None, cbar=1.0, alpha=1.0, d=2):
        if d not in (1, 2, 3):
            raise ValueError("d must lie in {1, 2, 3}")
        if alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        self.identity = np.eye(d)
        super().__init__(CenteredSet(Ball(1.0, (d, d)), self.identity))
        self.g = Quadratic(1.0, center=self.identity, shape=(d, d)) if g is None else g
        if self.g.shape != (d, d):
            raise DimensionMismatch("g must be d x d")
        self.cbar = float(cbar)
        self.alpha = float(alpha)
        self.barrier = Barrier(Ball(1.0, (d, d)), shift_kernel(self.g, self.identity), self.cbar, self.alpha)
        self.convex = self.barrier.convex

    @property
    def d(self):
        return self.shape[0]

    def h(self, t):
        return self.barrier.h(t)

    def _value(self, batch):
        return self.barrier._value(batch - self.identity)

    def _grad(self, batch):
        return self.barrier._grad(batch - self.identity)

    def upper_bound(self, t, C):
        return self.barrier.upper_bound(t, C)

    def shifted(self):
        """The kernel ``xi -> f(xi + I)`` on the unit ball at 0."""
        return self.barrier

    def to_dict(self):
        return {"variant": "hyperelastic", "g": self.g.to_dict(), "cbar": self.cbar, "alpha": self.alpha, "d": self.d}


def hyperelastic_integrand(coefficient: PeriodicCoefficient | None = None, **kwargs):
    """``W(x, xi) = A(x) f(xi)`` for a :class:`HyperelasticDensity` ``f``."""
    f = HyperelasticDensity(**kwargs)
    coefficient = PeriodicCoefficient.constant(1.0, f.d) if coefficient is None else coefficient
    return Integrand(coefficient, f)


def determinant(batch):
    """Cofactor-expansion determinant of a stack of square matrices (size <= 3)."""
    a = np.asarray(batch, dtype=float)
    n = a.shape[-1]
    if a.shape[-2] != n or n > 3:
        raise DimensionMismatch("determinant needs square matrices of size <= 3")
    if n == 1:
        return a[..., 0, 0]
    if n == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def det_positivity_check(xi):
    """Return ``(det xi, det xi > 0)``; accepts one matrix or a stack."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim < 2 or xi.shape[-1] != xi.shape[-2]:
        raise DimensionMismatch("square matrix expected")
    det = determinant(xi)
    if det.ndim == 0:
        return float(det), bool(det > 0)
    return det, det > 0


def blowup_probe(density: HyperelasticDensity, direction, ladder=None, coefficient=1.0, threshold=1e6, tol=1e-4):
    """Radial probe of ``A * f(I + t u)`` for a unit direction ``u``.

    The determinants along the ladder are attached to the probe.
    """
    u = check_matrix(direction, density.shape)
    nrm = float(np.linalg.norm(u))
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("direction must have unit norm")
    ladder = default_ladder() if ladder is None else np.asarray(ladder, dtype=float)
    pts = density.identity[None] + ladder[:, None, None] * u[None]
    values = float(coefficient) * density._value(pts)
    probe = _classify(u, ladder, values, tol, threshold, tail=4)
    probe.dets = determinant(pts)
    return probe


def shifted_integrand(W: Integrand, check=True, sample_cfg: SampleConfig | None = None, return_report=False):
    """``W_0(x, xi) = W(x, xi + I)`` on the unit ball centred at 0.

    Raises
    ------
    PreconditionError
        If ``check`` is set and the sampled hypothesis report on ``W_0``
        fails.
    """
    if not isinstance(W.kernel, HyperelasticDensity):
        raise TypeError("shifted_integrand needs a hyperelastic density")
    W0 = Integrand(W.coefficient, W.kernel.shifted())
    report = None
    if check or return_report:
        report = assumption_report(W0, sample_cfg)
        if check and not report.all_pass:
            raise PreconditionError(
                f"shifted integrand fails sampled checks: H1={report.h1_pass} H2={report.h2_pass} H3={report.h3_pass}"
            )
    return (W0, report) if return_report else W0


def whom_hyper(W: Integrand, xi, n_max=None, cfg=None, resolution=None, envelope="none", lamination=None, W0=None,
               gauge_tol=1e-12):
    """Homogenized hyperelastic density at ``xi``.

    Inside ``B(I)`` the cell value of the shifted integrand at ``xi - I``
    (optionally laminated, see :func:`periodic_homog.envelopes.zhw`); ``+inf``
    once ``|xi - I| >= 1 - gauge_tol`` (the barrier makes the boundary value
    infinite, and points built on the sphere may land a rounding error inside).
    """
    d = W.kernel.d
    batch, single = as_batch(xi, (d, d))
    W0 = shifted_integrand(W, check=False) if W0 is None else W0
    out = np.empty(len(batch))
    for k, z in enumerate(batch):
        s = z - np.eye(d)
        if frobenius(s[None])[0] >= 1.0 - gauge_tol:
            out[k] = np.inf
        else:
            out[k] = zhw(W0, s, n_max, cfg, resolution, envelope, lamination)
    return unbatch(out, single)


def polar_grid(d=2, radii=(0.0, 0.3, 0.6, 0.9), n_angles=8):
    """Points ``I + rho * u`` for unit directions ``u`` in the span of
    ``e_1 (x) e_1`` and ``e_1 (x) e_2``, plus the centre."""
    pts = [np.eye(d)]
    for rho in radii:
        if rho == 0:
            continue
        for th in 2 * np.pi * np.arange(n_angles) / n_angles:
            u = np.zeros((d, d))
            u[0, 0] = np.cos(th)
            if d > 1:
                u[0, 1] = np.sin(th)
            else:
                u[0, 0] = 1.0 if np.cos(th) >= 0 else -1.0
            pts.append(np.eye(d) + rho * u)
    return np.array(pts)


__all__ = [
    "CenteredSet",
    "ShiftedKernel",
    "shift_kernel",
    "HyperelasticDensity",
    "hyperelastic_integrand",
    "determinant",
    "det_positivity_check",
    "blowup_probe",
    "shifted_integrand",
    "whom_hyper",
    "polar_grid",
    "RadialProbe",
]
