"""Periodic product-form integrands ``W(x, xi) = A(x) f(xi)`` with values in
``[0, +inf]``, their truncations ``W_n`` and sampled hypothesis checks.

``+inf`` is an ordinary return value of every ``value`` method: a density is
infinite exactly where its argument leaves the effective domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ._validation import as_batch, unbatch
from .exceptions import DimensionMismatch
from .geometry import Ball, ConstraintSet, constraint_from_dict, random_directions


class PeriodicCoefficient:
    """Piecewise-constant ``Y``-periodic coefficient on a regular grid.

    ``samples`` has one axis per space dimension; ``samples[i, j]`` is the
    value on the cell ``[i/k1, (i+1)/k1) x [j/k2, (j+1)/k2)``.
    """

    def __init__(self, samples):
        a = np.asarray(samples, dtype=float)
        if a.ndim not in (1, 2):
            raise ValueError("coefficient grids must be 1-D or 2-D")
        if np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise ValueError("coefficient samples must be finite and positive")
        self.samples = a
        self.d = a.ndim
        self.c = float(a.min())

    @classmethod
    def constant(cls, value=1.0, d=1):
        return cls(np.full((1,) * d, float(value)))

    @classmethod
    def laminate(cls, values=(1.0, 2.0), d=1, axis=0):
        """Layers stacked along ``axis`` with equal volume fractions."""
        v = np.asarray(values, dtype=float)
        if d == 1:
            return cls(v)
        return cls(v[:, None] if axis == 0 else v[None, :])

    @classmethod
    def checkerboard(cls, values=(1.0, 2.0)):
        lo, hi = values
        return cls([[lo, hi], [hi, lo]])

    @property
    def sup(self):
        return float(self.samples.max())

    @property
    def mean(self):
        return float(self.samples.mean())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 0 or (x.ndim == 1 and self.d > 1)
        pts = np.atleast_1d(x).reshape(-1, self.d)
        frac = pts - np.floor(pts)
        idx = tuple(
            np.minimum((frac[:, k] * self.samples.shape[k]).astype(int), self.samples.shape[k] - 1)
            for k in range(self.d)
        )
        out = self.samples[idx]
        return float(out[0]) if single else out

    def cell_centers(self):
        axes = [(np.arange(k) + 0.5) / k for k in self.samples.shape]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_dict(self):
        return {"grid": self.samples.tolist()}


class DensityKernel:
    """Matrix density ``f`` with effective domain inside ``closure(domain)``.

    Subclasses implement batched ``_value`` (``+inf`` outside the domain) and
    ``_grad`` (meaningful where the value is finite).
    """

    convex = False
    #: infinite on the boundary too (``gauge >= 1``), not only outside it
    open_domain = False

    def __init__(self, domain: ConstraintSet | None, shape=None):
        if domain is None and shape is None:
            raise ValueError("kernel without a domain needs an explicit shape")
        self.domain = domain
        self.shape = tuple(domain.shape) if domain is not None else tuple(shape)
        if domain is not None and shape is not None and tuple(shape) != domain.shape:
            raise DimensionMismatch("kernel shape disagrees with its domain")

    def value(self, xi):
        batch, single = as_batch(xi, self.shape)
        return unbatch(self._value(batch), single)

    def grad(self, xi):
        batch, single = as_batch(xi, self.shape)
        g = self._grad(batch)
        return g[0] if single else g

    def __call__(self, xi):
        return self.value(xi)

    def gauge(self, batch):
        if self.domain is None:
            return np.zeros(len(batch))
        return self.domain._gauge(batch)

    def max_step(self, z, dz, tau):
        if self.domain is None:
            return np.full(len(z), np.inf)
        return self.domain.max_step(z, dz, tau)

    def _outside(self, batch):
        g = self.gauge(batch)
        return g >= 1.0 if self.open_domain else g > 1.0

    def upper_bound(self, t, C: ConstraintSet):
        """An upper bound of ``f`` over ``t * closure(C)``."""
        raise NotImplementedError

    def _scaled_gauge_bound(self, t, C):
        # gauge of own domain over t*C̄
        if self.domain is None:
            return 0.0
        if C is self.domain or C.to_dict() == self.domain.to_dict():
            return t
        return t * C.radius / self.domain.inradius

    def to_dict(self):
        raise NotImplementedError


class Quadratic(DensityKernel):
    """``weight * |xi - center|^2`` on the domain."""

    convex = True

    def __init__(self, weight=1.0, domain=None, center=None, shape=None):
        super().__init__(domain, shape)
        self.weight = float(weight)
        self.center = np.zeros(self.shape) if center is None else np.asarray(center, dtype=float)
        if self.center.shape != self.shape:
            raise DimensionMismatch("center has the wrong shape")

    def _value(self, batch):
        diff = batch - self.center
        out = self.weight * np.einsum("nij,nij->n", diff, diff)
        if self.domain is not None:
            out = np.where(self._outside(batch), np.inf, out)
        return out

    def _grad(self, batch):
        return 2.0 * self.weight * (batch - self.center)

    def upper_bound(self, t, C):
        return self.weight * (t * C.radius + float(np.linalg.norm(self.center))) ** 2

    def to_dict(self):
        out = {"variant": "quadratic", "weight": self.weight}
        if np.any(self.center):
            out["center"] = self.center.tolist()
        return out


class DoubleWell(DensityKernel):
    """Scalar double well ``(xi^2 - 1)^2`` with wells at ``+-1``."""

    def __init__(self, domain=None):
        domain = Ball(2.0) if domain is None else domain
        if domain.shape != (1, 1):
            raise DimensionMismatch("the double well is scalar only")
        super().__init__(domain)

    def _value(self, batch):
        s = batch[:, 0, 0]
        return np.where(self._outside(batch), np.inf, (s * s - 1.0) ** 2)

    def _grad(self, batch):
        s = batch[:, 0, 0]
        return (4.0 * s * (s * s - 1.0)).reshape(-1, 1, 1)

    def upper_bound(self, t, C):
        r = t * C.radius
        return max(1.0, (r * r - 1.0) ** 2)

    def to_dict(self):
        return {"variant": "double_well"}


class PowerGauge(DensityKernel):
    """``gauge(xi)^p`` on the domain, ``p >= 1``."""

    convex = True

    def __init__(self, domain, p=2.0):
        super().__init__(domain)
        if p < 1:
            raise ValueError("exponent must be >= 1")
        self.p = float(p)

    def _value(self, batch):
        g = self.domain._gauge(batch)
        return np.where(g > 1.0, np.inf, g**self.p)

    def _grad(self, batch):
        g = self.domain._gauge(batch)
        return (self.p * g ** (self.p - 1.0))[:, None, None] * self.domain.gauge_subgradient(batch)

    def upper_bound(self, t, C):
        return self._scaled_gauge_bound(t, C) ** self.p

    def to_dict(self):
        return {"variant": "power_gauge", "p": self.p}


class Barrier(DensityKernel):
    """``g(xi) + cbar * (1/(1 - gauge(xi)^alpha) - 1)`` on the open domain.

    ``g`` is any finite kernel (its own domain, if any, is ignored in favour
    of the barrier's). The value is ``+inf`` once ``gauge >= 1``.
    """

    open_domain = True

    def __init__(self, domain, g=None, cbar=1.0, alpha=1.0):
        super().__init__(domain)
        if not (cbar > 0 and alpha > 0):
            raise ValueError("cbar and alpha must be positive")
        self.g = Quadratic(0.0, shape=self.shape) if g is None else g
        if self.g.shape != self.shape:
            raise DimensionMismatch("g has the wrong shape")
        self.cbar = float(cbar)
        self.alpha = float(alpha)
        self.convex = bool(self.g.convex and self.alpha >= 1.0)

    def h(self, t):
        """Barrier profile ``cbar * t^alpha / (1 - t^alpha)`` (``+inf`` at t >= 1)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = np.where(t > 0, np.exp(self.alpha * np.log(np.where(t > 0, t, 1.0))), 0.0)
            one_minus = np.where(t > 0, -np.expm1(self.alpha * np.log(np.where(t > 0, t, 1.0))), 1.0)
            out = np.where(t < 1.0, self.cbar * ta / one_minus, np.inf)
        return out

    def h_prime(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logt = np.log(np.where(t > 0, t, 1.0))
            one_minus = -np.expm1(self.alpha * logt)
            d = self.cbar * self.alpha * np.exp((self.alpha - 1.0) * logt) / one_minus**2
        return np.where((t > 0) & (t < 1.0), d, 0.0)

    def _value(self, batch):
        t = self.domain._gauge(batch)
        out = self.g._value(batch) + self.h(t)
        return np.where(t >= 1.0, np.inf, out)

    def _grad(self, batch):
        t = self.domain._gauge(batch)
        return self.g._grad(batch) + self.h_prime(t)[:, None, None] * self.domain.gauge_subgradient(batch)

    def upper_bound(self, t, C):
        s = self._scaled_gauge_bound(t, C)
        return self.g.upper_bound(t, C) + float(self.h(s))

    def to_dict(self):
        return {"variant": "barrier", "g": self.g.to_dict(), "cbar": self.cbar, "alpha": self.alpha}


class Tabulated(DensityKernel):
    """Multilinear interpolant of tabulated values on a regular grid.

    The grid covers a box around the domain in flattened coordinates; points
    outside ``closure(domain)`` evaluate to ``+inf``, as do points whose
    interpolation stencil touches an infinite table entry.
    """

    def __init__(self, domain, axes, values):
        super().__init__(domain)
        n = self.shape[0] * self.shape[1]
        if len(axes) != n:
            raise DimensionMismatch(f"need {n} grid axes")
        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.values = np.asarray(values, dtype=float)
        self._interp = RegularGridInterpolator(self.axes, self.values, bounds_error=False, fill_value=np.inf)
        self._h = 1e-6 * max(float(a[-1] - a[0]) for a in self.axes)

    @classmethod
    def from_function(cls, fn, domain, points_per_axis=201):
        n = domain.shape[0] * domain.shape[1]
        r = domain.radius
        axes = [np.linspace(-r, r, points_per_axis)] * n
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, *domain.shape)
        vals = np.asarray(fn(mesh), dtype=float)
        vals = np.where(domain._gauge(mesh) > 1.0 + 1e-12, np.inf, vals)
        return cls(domain, axes, vals.reshape((points_per_axis,) * n))

    def _value(self, batch):
        flat = batch.reshape(len(batch), -1)
        with np.errstate(invalid="ignore"):
            out = self._interp(flat)
        out = np.where(np.isnan(out), np.inf, out)
        return np.where(self._outside(batch), np.inf, out)

    def _grad(self, batch):
        flat = batch.reshape(len(batch), -1)
        out = np.zeros_like(flat)
        for k in range(flat.shape[1]):
            e = np.zeros(flat.shape[1])
            e[k] = self._h
            with np.errstate(invalid="ignore"):
                fp, fm = self._interp(flat + e), self._interp(flat - e)
            diff = (fp - fm) / (2 * self._h)
            out[:, k] = np.where(np.isfinite(diff), diff, 0.0)
        return out.reshape(batch.shape)

    def upper_bound(self, t, C):
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if finite.size else np.inf

    def to_dict(self):
        return {"variant": "tabulated", "axes": [a.tolist() for a in self.axes], "values": self.values.tolist()}


def kernel_from_dict(spec, domain):
    spec = dict(spec)
    variant = spec.pop("variant")
    if variant == "quadratic":
        return Quadratic(spec.get("weight", 1.0), domain=domain, center=spec.get("center"),
                         shape=None if domain is not None else spec.get("shape"))
    if variant == "double_well":
        return DoubleWell(domain)
    if variant == "power_gauge":
        return PowerGauge(domain, spec.get("p", 2.0))
    if variant == "barrier":
        g_spec = spec.get("g")
        g = None
        if g_spec is not None:
            g_spec = dict(g_spec)
            g_spec.setdefault("shape", list(domain.shape))
            g = kernel_from_dict(g_spec, None)
        return Barrier(domain, g=g, cbar=spec.get("cbar", 1.0), alpha=spec.get("alpha", 1.0))
    if variant == "tabulated":
        return Tabulated(domain, spec["axes"], spec["values"])
    raise ValueError(f"unknown kernel variant {variant!r}")


class Integrand:
    """``W(x, xi) = A(x) * f(xi)``, ``Y``-periodic in ``x``."""

    def __init__(self, coefficient: PeriodicCoefficient, kernel: DensityKernel):
        if coefficient.d != kernel.shape[1]:
            raise DimensionMismatch(
                f"coefficient lives in R^{coefficient.d} but matrices are {kernel.shape[0]}x{kernel.shape[1]}"
            )
        self.coefficient = coefficient
        self.kernel = kernel

    @property
    def shape(self):
        return self.kernel.shape

    @property
    def d(self):
        return self.coefficient.d

    @property
    def domain(self):
        return self.kernel.domain

    def density(self, x, batch):
        """Batched ``W`` at quadrature points ``x`` (N, d) and matrices (N, m, d)."""
        return self.coefficient(x) * self.kernel._value(batch)

    def density_grad(self, x, batch):
        return self.coefficient(x)[:, None, None] * self.kernel._grad(batch)

    def gauge(self, batch):
        return self.kernel.gauge(batch)

    def max_step(self, z, dz, tau):
        return self.kernel.max_step(z, dz, tau)

    def to_dict(self):
        return {"coefficient": self.coefficient.to_dict(), "kernel": self.kernel.to_dict()}


def eval_W(W: Integrand, x, xi):
    """Evaluate ``W(x, xi)``; returns ``+inf`` outside the effective domain.

    ``x`` is one point of ``R^d`` (or a stack broadcast against ``xi``).
    """
    batch, single = as_batch(xi, W.shape)
    pts = np.broadcast_to(np.asarray(x, dtype=float).reshape(-1, W.d), (len(batch), W.d))
    return unbatch(W.density(pts, batch), single)


class TruncationSchedule:
    """Increasing levels ``t_n`` in ``[0, 1)`` with supremum 1.

    Without explicit values the default ``t_n = 1 - 2**-n`` is used.
    """

    def __init__(self, values=None):
        if values is not None:
            v = np.asarray(values, dtype=float)
            if v.ndim != 1 or v.size == 0:
                raise ValueError("schedule values must be a non-empty 1-D sequence")
            if np.any(np.diff(v) <= 0) or v[0] < 0 or v[-1] >= 1:
                raise ValueError("schedule must be strictly increasing inside [0, 1)")
            self.values = v
        else:
            self.values = None

    def __call__(self, n):
        if n < 1:
            raise ValueError("truncation indices start at 1")
        if self.values is None:
            return 1.0 - 2.0 ** (-n)
        if n > len(self.values):
            raise IndexError(f"schedule only has {len(self.values)} certified levels")
        return float(self.values[n - 1])

    def __len__(self):
        return np.iinfo(np.int64).max if self.values is None else len(self.values)

    def __repr__(self):
        return "TruncationSchedule(default)" if self.values is None else f"TruncationSchedule({self.values.tolist()})"


class TruncatedIntegrand:
    """Finite truncation ``W_n``: equal to ``W`` on ``t_n C̄`` and to
    ``n (1 + dist(xi, C̄))`` elsewhere.

    Attributes
    ----------
    alpha_n : float
        Linear growth constant, ``W_n(x, xi) <= alpha_n (1 + |xi|)``.
    """

    def __init__(self, base: Integrand, n: int, schedule: TruncationSchedule | None = None):
        if base.domain is None:
            raise ValueError("truncation needs a constrained integrand")
        if int(n) < 1:
            raise ValueError("n must be a positive integer")
        self.base = base
        self.n = int(n)
        self.schedule = schedule if schedule is not None else TruncationSchedule()
        self.t_n = self.schedule(self.n)
        C = base.domain
        sup_inside = base.coefficient.sup * base.kernel.upper_bound(self.t_n, C)
        self.alpha_n = float(max(sup_inside, self.n * (1.0 + C.diameter)))

    coefficient = property(lambda self: self.base.coefficient)
    kernel = property(lambda self: self.base.kernel)
    shape = property(lambda self: self.base.shape)
    d = property(lambda self: self.base.d)
    domain = property(lambda self: self.base.domain)

    def _inner(self, batch):
        return self.domain._gauge(batch) <= self.t_n

    def density(self, x, batch):
        inner = self._inner(batch)
        out = self.n * (1.0 + self.domain._dist(batch))
        if inner.any():
            out[inner] = self.base.density(x[inner], batch[inner])
        return out

    def density_grad(self, x, batch):
        inner = self._inner(batch)
        C = self.domain
        dist = C._dist(batch)
        out = np.zeros_like(batch)
        far = (~inner) & (dist > 0)
        if far.any():
            sub = batch[far]
            out[far] = self.n * (sub - C.project(sub)) / dist[far][:, None, None]
        if inner.any():
            out[inner] = self.base.density_grad(x[inner], batch[inner])
        return out

    def gauge(self, batch):
        return self.base.gauge(batch)

    def max_step(self, z, dz, tau):
        return self.base.max_step(z, dz, tau)


def eval_Wn(Wn: TruncatedIntegrand, x, xi):
    batch, single = as_batch(xi, Wn.shape)
    pts = np.broadcast_to(np.asarray(x, dtype=float).reshape(-1, Wn.d), (len(batch), Wn.d))
    return unbatch(Wn.density(np.ascontiguousarray(pts), batch), single)


@dataclass
class SampleConfig:
    """Sampling plan for :func:`assumption_report`."""

    n_directions: int = 64
    n_radial: int = 33
    eta_ladder: tuple = (0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)
    eps_list: tuple = (1.0, 0.1, 0.01)
    t_ladder: tuple = (0.5, 0.9, 0.99, 0.999)
    n_levels: int = 10
    max_candidate_exponent: int = 50
    seed: int = 0


@dataclass
class HypothesisReport:
    h1_modulus: dict
    h1_table: dict
    h1_pass: bool
    h2_sups: dict
    h2_pass: bool
    h3_shell_infs: dict
    h3_pass: bool
    schedule: TruncationSchedule | None
    schedule_thinned: bool
    resolution: dict = field(default_factory=dict)

    @property
    def all_pass(self):
        return self.h1_pass and self.h2_pass and self.h3_pass


def _boundary_samples(C, cfg, rng):
    dirs = random_directions(C.shape, cfg.n_directions, rng)
    # include signed coordinate directions, where box/polytope gauges peak
    eye = np.eye(C.shape[0] * C.shape[1]).reshape(-1, *C.shape)
    dirs = np.concatenate([dirs, eye, -eye])
    return C.boundary_point(dirs)


def _shell_inf(W, C, bnd, xs, lo, n_radial):
    levels = lo + (1.0 - lo) * np.linspace(0.0, 1.0, n_radial)
    pts = (levels[:, None, None, None] * bnd[None]).reshape(-1, *C.shape)
    vals = [W.density(np.broadcast_to(x, (len(pts), W.d)), pts).min() for x in xs]
    return float(min(vals))


def assumption_report(W: Integrand, cfg: SampleConfig | None = None) -> HypothesisReport:
    """Sampled evidence for the three structural hypotheses on ``W``.

    ``h1_*``, radial upper semicontinuity: for each ``eta`` of the ladder the
    sampled modulus ``sup [W(x, t xi) - W(x, xi)]`` over ``1 - t <= eta`` is
    recorded; ``h1_table[eps]`` is the largest ladder ``eta`` whose modulus
    is ``<= eps`` (0 when none is).

    ``h2_*``, local boundedness: sup of ``W`` over ``t C̄`` for each ``t`` of
    ``cfg.t_ladder``; passes when all are finite.

    ``h3_*``, singularity at the boundary, in the shell form
    ``inf_{C̄ \\ t_n C̄} W >= n``: checked for the default schedule first and,
    if that fails, for a schedule thinned out of the candidates
    ``1 - 2**-k``. ``schedule`` is the certified one (``None`` on failure).

    Sampled sups and infs are only estimates; the sample sizes are recorded
    in ``resolution``.
    """
    cfg = cfg or SampleConfig()
    C = W.domain
    if C is None:
        raise ValueError("integrand has no constraint set")
    if cfg.n_directions < 1 or cfg.n_radial < 2 or not cfg.eta_ladder or not cfg.t_ladder:
        raise ValueError("empty sample sets")
    rng = np.random.default_rng(cfg.seed)
    xs = W.coefficient.cell_centers()
    bnd = _boundary_samples(C, cfg, rng)
    open_dom = getattr(W.kernel, "open_domain", False)

    # radial upper semicontinuity
    s_top = 1.0 - 1e-3 if open_dom else 1.0
    radii = np.linspace(0.0, s_top, cfg.n_radial)[1:]
    base = (radii[:, None, None, None] * bnd[None]).reshape(-1, *C.shape)
    modulus = {}
    for eta in sorted(cfg.eta_ladder, reverse=True):
        worst = -np.inf
        for t in 1.0 - eta * np.linspace(0.0, 1.0, 6)[1:]:
            for x in xs:
                xb = np.broadcast_to(x, (len(base), W.d))
                f0 = W.density(xb, base)
                f1 = W.density(xb, t * base)
                ok = np.isfinite(f0)
                if ok.any():
                    worst = max(worst, float(np.max(f1[ok] - f0[ok])))
        modulus[float(eta)] = max(worst, 0.0)
    table = {}
    for eps in cfg.eps_list:
        good = [eta for eta, w in modulus.items() if w <= eps]
        table[float(eps)] = max(good) if good else 0.0
    h1_pass = all(v > 0 for v in table.values())

    # local boundedness
    sups = {}
    for t in cfg.t_ladder:
        pts = (t * np.linspace(0.0, 1.0, cfg.n_radial)[:, None, None, None] * bnd[None]).reshape(-1, *C.shape)
        sups[float(t)] = float(max(W.density(np.broadcast_to(x, (len(pts), W.d)), pts).max() for x in xs))
    h2_pass = all(np.isfinite(v) for v in sups.values())

    # shell bound at the boundary
    default = TruncationSchedule()
    infs = {n: _shell_inf(W, C, bnd, xs, default(n), cfg.n_radial) for n in range(1, cfg.n_levels + 1)}
    schedule, thinned = None, False
    if all(v >= n for n, v in infs.items()):
        schedule = default
    else:
        chosen, k = [], 0
        cand_inf = {}
        for n in range(1, cfg.n_levels + 1):
            k += 1
            while k <= cfg.max_candidate_exponent:
                if k not in cand_inf:
                    cand_inf[k] = _shell_inf(W, C, bnd, xs, 1.0 - 2.0**-k, cfg.n_radial)
                if cand_inf[k] >= n:
                    break
                k += 1
            if k > cfg.max_candidate_exponent:
                chosen = None
                break
            chosen.append(1.0 - 2.0**-k)
        if chosen:
            schedule, thinned = TruncationSchedule(chosen), True
            infs = {n: cand_inf[-int(round(np.log2(1.0 - t)))] for n, t in enumerate(chosen, 1)}
    h3_pass = schedule is not None

    resolution = {
        "directions": int(len(bnd)),
        "radial_points": cfg.n_radial,
        "x_points": int(len(xs)),
        "levels": cfg.n_levels,
    }
    return HypothesisReport(modulus, table, h1_pass, sups, h2_pass, infs, h3_pass, schedule, thinned, resolution)


def certified_schedule(W: Integrand, cfg: SampleConfig | None = None) -> TruncationSchedule:
    """Schedule satisfying the shell bound on samples, or ``ValueError``."""
    rep = assumption_report(W, cfg)
    if rep.schedule is None:
        raise ValueError("no schedule satisfies the shell bound; the integrand is not singular at the boundary")
    return rep.schedule


def integrand_from_dict(spec):
    """Build an :class:`Integrand` from ``{"constraint", "coefficient", "kernel"}``."""
    domain = constraint_from_dict(spec["constraint"])
    coef = spec.get("coefficient", {"grid": [1.0]})
    grid = coef["grid"] if isinstance(coef, dict) else coef
    if isinstance(grid, str):
        grid = np.loadtxt(grid, delimiter=",", ndmin=1)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 2 and domain.shape[1] == 1 and 1 in grid.shape:
        grid = grid.ravel()
    return Integrand(PeriodicCoefficient(grid), kernel_from_dict(spec["kernel"], domain))
