"""Feasible descent for discrete energies ``sum_e vol_e W(x_e, Z + grad phi_e)``.

Descent directions are gradients taken in the discrete H^1_0 metric (the
P1 stiffness matrix is the preconditioner), so quadratic-like energies
converge in a mesh-independent number of steps. Steps are truncated to the
feasible segment where every element satisfies ``gauge <= tau`` (and
``|grad phi| <= r`` when a gradient bound is set), then backtracked until
the Armijo condition holds. Every accepted iterate is feasible, so the
returned energy is always an attained upper bound of the discrete infimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from .geometry import _ball_max_step
from .mesh import StructuredMesh


@dataclass
class SolverConfig:
    """Options of the multistart descent.

    ``restarts`` counts starting fields including the zero field; with
    ``restarts=0`` no descent is run and only the zero field (and any warm
    starts) are evaluated.
    """

    restarts: int = 8
    max_iter: int = 2000
    gtol: float = 1e-8
    tau_max: float = 1.0 - 1e-3
    seed: int = 0
    armijo: float = 1e-4
    perturbation: float = 0.5
    stall_window: int = 50
    stall_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.tau_max < 1.0:
            raise ValueError("tau_max must lie in (0, 1)")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass
class DescentResult:
    value: float
    field: np.ndarray
    iterations: int
    restarts: int
    best_restart: int
    slack: float
    converged: bool
    history: list = field(default_factory=list)


class FieldProblem:
    """Discrete energy over P1 fields on ``mesh``.

    Parameters
    ----------
    mesh : StructuredMesh
    W : integrand-like
        Provides ``density``, ``density_grad``, ``gauge``, ``max_step`` and ``shape``.
    Z : (m, d) array
        Constant gradient added to every element (macroscopic gradient).
    pinned : bool array over nodes
        Nodes held at zero.
    x_scale : float
        Quadrature points are passed to ``W`` as ``barycenter / x_scale``.
    normalization : float
        Energies are divided by this volume.
    tau : float
        Per-element feasibility cap on ``gauge(Z + grad phi)``.
    r : float
        Bound on ``|grad phi|`` per element (``inf`` for none).
    """

    def __init__(self, mesh: StructuredMesh, W, Z, pinned, x_scale=1.0, normalization=1.0, tau=1.0, r=np.inf):
        self.mesh = mesh
        self.W = W
        self.m = W.shape[0]
        self.Z = np.asarray(Z, dtype=float).reshape(W.shape)
        self.pinned = np.asarray(pinned, dtype=bool)
        self.free = np.flatnonzero(~self.pinned)
        self.xq = np.ascontiguousarray(mesh.barycenters / x_scale)
        self.wq = mesh.volumes / normalization
        self.tau = float(tau)
        self.r = float(r)
        K = mesh.stiffness()[self.free][:, self.free] * (2.0 / normalization)
        self._lu = splu(K.tocsc()) if len(self.free) else None

    def full(self, phi):
        u = np.zeros((self.mesh.n_nodes, self.m))
        u[self.free] = phi
        return u

    def element_gradients(self, phi):
        return self.Z[None] + self.mesh.gradients(self.full(phi))

    def energy_from_gradients(self, grads):
        vals = self.W.density(self.xq, grads)
        return float(np.dot(self.wq, vals))

    def energy(self, phi):
        return self.energy_from_gradients(self.element_gradients(phi))

    def energy_grad(self, phi):
        grads = self.element_gradients(phi)
        e = self.energy_from_gradients(grads)
        dens = self.W.density_grad(self.xq, grads) * self.wq[:, None, None]
        g = self.mesh.gradients_adjoint(dens)[self.free]
        return e, g

    def feasible_step(self, phi, p):
        """Largest step along ``p`` keeping every element feasible."""
        grads = self.element_gradients(phi)
        dgrads = self.mesh.gradients(self.full(p))
        a = self.W.max_step(grads, dgrads, self.tau)
        if np.isfinite(self.r):
            a = np.minimum(a, _ball_max_step(grads - self.Z[None], dgrads, self.r))
        return float(a.min()) if len(a) else np.inf

    def max_gauge(self, phi):
        return float(self.W.gauge(self.element_gradients(phi)).max())

    def precondition(self, g):
        return self._lu.solve(g)


def _descend(problem: FieldProblem, phi, cfg: SolverConfig, best=np.inf):
    e, g = problem.energy_grad(phi)
    step = 1.0
    it = 0
    converged = False
    trail = [e]
    for it in range(1, cfg.max_iter + 1):
        p = -problem.precondition(g)
        dec = -float(np.sum(g * p))
        if not np.isfinite(dec) or dec <= cfg.gtol**2:
            converged = True
            break
        amax = problem.feasible_step(phi, p)
        a = min(step, amax)
        accepted = False
        while a > 1e-18:
            trial = phi + a * p
            e_trial = problem.energy(trial)
            if e_trial <= e - cfg.armijo * a * dec:
                accepted = True
                break
            a *= 0.5
        if not accepted:
            converged = True  # no feasible decrease left at machine precision
            break
        e_new, g_new = problem.energy_grad(trial)
        s = trial - phi
        y = g_new - g
        sy = float(np.sum(s * y))
        sPs = a * a * dec
        step = sPs / sy if sy > 0 else 2.0 * a
        step = float(min(max(step, 1e-12), 1e8))
        rel = (e - e_new) / max(1.0, abs(e))
        phi, e, g = trial, e_new, g_new
        if rel < 1e-16:
            converged = True
            break
        trail.append(e)
        if len(trail) > cfg.stall_window:
            # kinks (e.g. at a barrier centre) make progress crawl; stop once it stalls
            gain = trail[-cfg.stall_window - 1] - e
            if gain <= cfg.stall_tol * max(1.0, abs(e)):
                converged = True
                break
            # abandon a restart that cannot reach the incumbent at its current rate
            if e - best > gain * (cfg.max_iter - it) / cfg.stall_window:
                break
    return phi, e, it, converged


def minimize_field(problem: FieldProblem, cfg: SolverConfig, warm_starts=()):
    """Multistart feasible descent; returns the best :class:`DescentResult`.

    Starting fields: zero, ``restarts - 1`` random perturbations (scaled to
    stay feasible), then every warm start in ``warm_starts`` (nodal arrays
    over the full mesh). Infeasible warm starts are skipped.
    """
    n_free = len(problem.free)
    rng = np.random.default_rng(cfg.seed)
    zero = np.zeros((n_free, problem.m))
    starts = [zero]
    for k in range(1, cfg.restarts):
        noise = rng.standard_normal((n_free, problem.m))
        if k % 2 == 0 and n_free:
            noise = problem.precondition(noise)
        amax = problem.feasible_step(zero, noise) if n_free else 0.0
        scale = min(amax, 1e6) * cfg.perturbation * rng.uniform(0.2, 1.0)
        starts.append(scale * noise)
    for w in warm_starts:
        w = np.asarray(w, dtype=float).reshape(problem.mesh.n_nodes, problem.m)
        starts.append(w[problem.free])

    best = None
    total_it = 0
    history = []
    for k, phi0 in enumerate(starts):
        if problem.max_gauge(phi0) > problem.tau:
            history.append(np.inf)
            continue
        if np.isfinite(problem.r) and n_free:
            dg = problem.mesh.gradients(problem.full(phi0))
            if np.sqrt(np.einsum("nij,nij->n", dg, dg)).max() > problem.r:
                history.append(np.inf)
                continue
        if cfg.restarts == 0 or n_free == 0:
            phi, e, it, conv = phi0, problem.energy(phi0), 0, True
        else:
            phi, e, it, conv = _descend(problem, phi0, cfg, np.inf if best is None else best[1])
        total_it += it
        history.append(e)
        if best is None or e < best[1]:
            best = (phi, e, k, conv)
    if best is None:
        raise RuntimeError("no feasible starting field")
    phi, e, k, conv = best
    slack = problem.tau - problem.max_gauge(phi)
    return DescentResult(e, problem.full(phi), total_it, len(starts), k, slack, conv, history)
