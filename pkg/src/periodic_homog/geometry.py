"""Bounded convex constraint sets containing the origin in their interior.

Every set is queried through its Minkowski gauge
``gauge(xi) = inf{lam > 0 : xi in lam * closure(C)}`` and the Euclidean
distance to its closure. Sublevel sets of the gauge give the scaled copies
``t * closure(C)`` (``gauge <= t``) and the interior (``gauge < 1``).

Matrices are plain ``(m, d)`` numpy arrays; all methods also accept stacks
of shape ``(N, m, d)`` and then return arrays of length ``N``.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import HalfspaceIntersection

from ._validation import as_batch, frobenius, unbatch
from .exceptions import NotCompactlyContained, PreconditionError, ProjectionNotConverged


class ConstraintSet:
    """Base class. Subclasses implement the batched ``_gauge`` and ``_dist``."""

    kind = ""

    def __init__(self, shape):
        m, d = (int(s) for s in shape)
        if not (1 <= m <= 3 and 1 <= d <= 3):
            raise ValueError("m and d must lie in {1, 2, 3}")
        self.shape = (m, d)

    def gauge(self, xi):
        batch, single = as_batch(xi, self.shape)
        return unbatch(self._gauge(batch), single)

    def dist_to_closure(self, xi):
        batch, single = as_batch(xi, self.shape)
        return unbatch(self._dist(batch), single)

    def contains(self, xi, t=1.0):
        """True where ``xi`` lies in ``t * closure(C)``."""
        return self.gauge(xi) <= t

    def gauge_subgradient(self, batch):
        raise NotImplementedError

    def max_step(self, z, dz, tau):
        """Largest ``a >= 0`` with ``gauge(z + a*dz) <= tau`` for each row.

        Assumes ``gauge(z) <= tau``; rows where ``dz`` never leaves the set
        get ``inf``.
        """
        raise NotImplementedError

    @property
    def radius(self):
        """``max |xi|`` over the closure."""
        raise NotImplementedError

    @property
    def diameter(self):
        raise NotImplementedError

    @property
    def inradius(self):
        """Largest ``rho`` with the closed Frobenius ball of radius rho inside C̄."""
        raise NotImplementedError

    def boundary_point(self, direction):
        """Scale ``direction`` (nonzero) onto the boundary, ``gauge == 1``."""
        batch, single = as_batch(direction, self.shape)
        g = self._gauge(batch)
        if np.any(g <= 0):
            raise ValueError("direction must have positive gauge")
        out = batch / g[:, None, None]
        return out[0] if single else out

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class Ball(ConstraintSet):
    """Closed Frobenius ball ``|xi| <= radius`` centred at 0."""

    kind = "ball"

    def __init__(self, radius=1.0, shape=(1, 1)):
        super().__init__(shape)
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.r = float(radius)

    def _gauge(self, batch):
        return frobenius(batch) / self.r

    def _dist(self, batch):
        return np.maximum(frobenius(batch) - self.r, 0.0)

    def project(self, batch):
        nrm = frobenius(batch)
        scale = np.where(nrm > self.r, self.r / np.where(nrm > 0, nrm, 1.0), 1.0)
        return batch * scale[:, None, None]

    def gauge_subgradient(self, batch):
        nrm = frobenius(batch)
        safe = np.where(nrm > 0, nrm, 1.0)
        return batch / (self.r * safe)[:, None, None]

    def max_step(self, z, dz, tau):
        return _ball_max_step(z, dz, tau * self.r)

    @property
    def radius(self):
        return self.r

    @property
    def diameter(self):
        return 2.0 * self.r

    @property
    def inradius(self):
        return self.r

    def to_dict(self):
        return {"shape": "ball", "radius": self.r, "m": self.shape[0], "d": self.shape[1]}


class Box(ConstraintSet):
    """Entrywise box ``|xi_ij| <= w_ij``."""

    kind = "box"

    def __init__(self, half_widths=1.0, shape=(1, 1)):
        super().__init__(shape)
        w = np.broadcast_to(np.asarray(half_widths, dtype=float), self.shape).copy()
        if np.any(w <= 0):
            raise ValueError("half-widths must be positive")
        self.w = w

    def _gauge(self, batch):
        return np.max(np.abs(batch) / self.w, axis=(1, 2))

    def _dist(self, batch):
        return frobenius(batch - self.project(batch))

    def project(self, batch):
        return np.clip(batch, -self.w, self.w)

    def gauge_subgradient(self, batch):
        ratios = (np.abs(batch) / self.w).reshape(len(batch), -1)
        idx = np.argmax(ratios, axis=1)
        out = np.zeros_like(ratios)
        flat = batch.reshape(len(batch), -1)
        out[np.arange(len(batch)), idx] = np.sign(flat[np.arange(len(batch)), idx]) / self.w.ravel()[idx]
        return out.reshape(batch.shape)

    def max_step(self, z, dz, tau):
        lim = tau * self.w
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            up = np.where(dz > 0, (lim - z) / dz, np.inf)
            down = np.where(dz < 0, (-lim - z) / dz, np.inf)
        step = np.minimum(up, down).reshape(len(z), -1).min(axis=1)
        return np.maximum(step, 0.0)

    @property
    def radius(self):
        return float(np.sqrt(np.sum(self.w**2)))

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def inradius(self):
        return float(self.w.min())

    def to_dict(self):
        return {"shape": "box", "half_widths": self.w.tolist(), "m": self.shape[0], "d": self.shape[1]}


class Polytope(ConstraintSet):
    """Intersection of half-spaces ``<a_i, xi> <= b_i`` with every ``b_i > 0``.

    The Frobenius inner product is used for ``<a_i, xi>``. Distances are
    computed with Dykstra's alternating projections.
    """

    kind = "polytope"
    tol = 1e-10
    max_iter = 10_000

    def __init__(self, normals, offsets, shape=(1, 1)):
        super().__init__(shape)
        a = np.asarray(normals, dtype=float).reshape(-1, *self.shape)
        b = np.asarray(offsets, dtype=float).ravel()
        if len(a) != len(b) or len(b) == 0:
            raise ValueError("need one offset per normal")
        if np.any(b <= 0):
            raise ValueError("offsets must be positive so that 0 is interior")
        if np.any(frobenius(a) == 0):
            raise ValueError("zero normal")
        self.a = a
        self.b = b
        self._vertices = self._compute_vertices()

    def _compute_vertices(self):
        n = self.shape[0] * self.shape[1]
        A = self.a.reshape(len(self.b), n)
        if n == 1:
            pos, neg = A[:, 0] > 0, A[:, 0] < 0
            if not (pos.any() and neg.any()):
                raise ValueError("polytope is unbounded")
            hi = np.min(self.b[pos] / A[pos, 0])
            lo = np.max(self.b[neg] / A[neg, 0])
            return np.array([[lo], [hi]])
        halfspaces = np.hstack([A, -self.b[:, None]])
        try:
            hs = HalfspaceIntersection(halfspaces, np.zeros(n))
        except Exception as exc:  # qhull raises its own error type
            raise ValueError(f"polytope is unbounded or degenerate: {exc}") from exc
        verts = hs.intersections
        if not np.all(np.isfinite(verts)) or np.abs(verts).max() > 1e12:
            raise ValueError("polytope is unbounded")
        return verts

    def _gauge(self, batch):
        proj = np.einsum("kij,nij->nk", self.a, batch)
        return np.max(np.maximum(proj, 0.0) / self.b, axis=1)

    def project(self, batch):
        """Euclidean projection onto the closure (Dykstra)."""
        x = batch.reshape(len(batch), -1).copy()
        A = self.a.reshape(len(self.b), -1)
        sq = np.sum(A**2, axis=1)
        incr = np.zeros((len(self.b),) + x.shape)
        for _ in range(self.max_iter):
            prev, prev_incr = x.copy(), incr.copy()
            for i in range(len(self.b)):
                y = x + incr[i]
                viol = np.maximum(y @ A[i] - self.b[i], 0.0)
                x = y - (viol / sq[i])[:, None] * A[i]
                incr[i] = y - x
            # the iterate can pause while the corrections still move, so test both
            if max(np.max(np.abs(x - prev)), np.max(np.abs(incr - prev_incr))) <= self.tol:
                return x.reshape(batch.shape)
        raise ProjectionNotConverged(
            f"Dykstra projection did not reach {self.tol} within {self.max_iter} sweeps"
        )

    def _dist(self, batch):
        out = np.zeros(len(batch))
        outside = self._gauge(batch) > 1.0
        if outside.any():
            sub = batch[outside]
            out[outside] = frobenius(sub - self.project(sub))
        return out

    def gauge_subgradient(self, batch):
        ratios = np.einsum("kij,nij->nk", self.a, batch) / self.b
        idx = np.argmax(ratios, axis=1)
        active = ratios[np.arange(len(batch)), idx] > 0
        return self.a[idx] / self.b[idx][:, None, None] * active[:, None, None]

    def max_step(self, z, dz, tau):
        az = np.einsum("kij,nij->nk", self.a, z)
        adz = np.einsum("kij,nij->nk", self.a, dz)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(adz > 0, (tau * self.b - az) / adz, np.inf)
        return np.maximum(step.min(axis=1), 0.0)

    @property
    def radius(self):
        return float(np.max(np.linalg.norm(self._vertices, axis=1)))

    @property
    def diameter(self):
        v = self._vertices
        return float(max(np.linalg.norm(p - q) for p, q in itertools.combinations(v, 2)))

    @property
    def inradius(self):
        return float(np.min(self.b / frobenius(self.a)))

    def to_dict(self):
        return {
            "shape": "polytope",
            "normals": self.a.tolist(),
            "offsets": self.b.tolist(),
            "m": self.shape[0],
            "d": self.shape[1],
        }


def _ball_max_step(z, dz, rad):
    """Largest ``a >= 0`` with ``|z + a dz| <= rad`` (rowwise, ``|z| <= rad``)."""
    qa = np.einsum("nij,nij->n", dz, dz)
    qb = 2.0 * np.einsum("nij,nij->n", z, dz)
    qc = np.minimum(np.einsum("nij,nij->n", z, z) - rad**2, 0.0)
    disc = np.sqrt(np.maximum(qb**2 - 4.0 * qa * qc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        # numerically stable root of qa a^2 + qb a + qc = 0
        root = np.where(qb > 0, -2.0 * qc / (qb + disc), (-qb + disc) / (2.0 * qa))
    root = np.where(qa > 0, root, np.inf)
    return np.maximum(np.nan_to_num(root, nan=np.inf), 0.0)


def constraint_from_dict(spec):
    """Build a constraint set from its serialized form."""
    spec = dict(spec)
    kind = spec.pop("shape")
    shape = (spec.pop("m", 1), spec.pop("d", 1))
    if kind == "ball":
        return Ball(spec.pop("radius", 1.0), shape=shape)
    if kind == "box":
        return Box(spec.pop("half_widths", 1.0), shape=shape)
    if kind == "polytope":
        return Polytope(spec.pop("normals"), spec.pop("offsets"), shape=shape)
    raise ValueError(f"unknown constraint shape {kind!r}")


def minimal_scale_containing(C, K):
    """Return ``t* = max gauge`` over the sample set ``K``.

    Every ``t`` in ``(t*, 1)`` satisfies ``K ⊂ t int C``.

    Raises
    ------
    NotCompactlyContained
        If some sample has gauge >= 1.
    """
    batch, _ = as_batch(K, C.shape)
    if len(batch) == 0:
        raise ValueError("empty sample set")
    g = C._gauge(batch)
    if np.any(g >= 1.0):
        raise NotCompactlyContained(f"sample with gauge {g.max():.6g} >= 1")
    return float(g.max())


def neighborhood_inclusion_check(C, rho, r, samples):
    """Check ``dist(xi, C̄) <= rho*r/2  =>  gauge(xi) < 1 + r`` on samples.

    ``rho`` must satisfy ``rho * B̄ ⊂ int C``, i.e. ``rho < inradius``.
    Samples farther than ``rho*r/2`` from C̄ impose nothing.
    """
    if not (rho > 0 and r > 0):
        raise PreconditionError("rho and r must be positive")
    if rho >= C.inradius:
        raise PreconditionError(f"rho={rho} does not fit inside C (inradius {C.inradius})")
    batch, _ = as_batch(samples, C.shape)
    near = C._dist(batch) <= rho * r / 2.0
    return bool(np.all(C._gauge(batch[near]) < 1.0 + r))


def random_directions(shape, n, rng):
    """``n`` Frobenius-unit matrices, uniformly distributed on the sphere."""
    z = rng.standard_normal((n,) + tuple(shape))
    return z / frobenius(z)[:, None, None]
