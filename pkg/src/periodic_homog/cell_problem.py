"""Discrete multi-cell problems.

For a macroscopic gradient ``xi`` and multiplicity ``n`` the cell value is

    (1/n^d) inf { int_{nY} W(x, xi + grad phi) dx : phi = 0 on the boundary of nY }

minimised over P1 fields on a structured mesh of ``nY``; ``hW`` takes the
minimum over ``n = 1..n_max``. Every reported value is attained by a
feasible field, so it bounds the continuum infimum from above.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from ._validation import check_matrix
from .exceptions import InfeasibleMacroGradient
from .integrand import Integrand, TruncatedIntegrand, TruncationSchedule
from .mesh import StructuredMesh, tile_field
from .solver import FieldProblem, SolverConfig, minimize_field

DEFAULT_RESOLUTION = {1: 64, 2: 8}
DEFAULT_N_MAX = {1: 8, 2: 3}


@dataclass
class TestField:
    """Zero-trace P1 field on a cell mesh."""

    __test__ = False  # not a pytest class

    mesh: StructuredMesh
    values: np.ndarray

    def gradients(self):
        return self.mesh.gradients(self.values)


@dataclass
class CellSolveResult:
    value: float
    field: TestField
    n_used: int
    r: float
    feasible: bool
    diagnostics: dict = field(default_factory=dict)

    def record(self, xi):
        """Flat record for CSV/JSON output."""
        return {
            "xi": np.asarray(xi, dtype=float).ravel().tolist(),
            "n": self.n_used,
            "r": self.r,
            "value": self.value,
            "iterations": self.diagnostics.get("iterations", 0),
            "feasible": self.feasible,
        }


def _resolution(W, resolution):
    return DEFAULT_RESOLUTION[W.d] if resolution is None else int(resolution)


def cell_value(
    W: Integrand,
    xi,
    n: int = 1,
    r: float = np.inf,
    cfg: SolverConfig | None = None,
    resolution: int | None = None,
    warm_starts=(),
) -> CellSolveResult:
    """Minimise the normalised energy over zero-trace fields on ``nY``.

    Each element keeps ``gauge(xi + grad phi) <= max(cfg.tau_max, gauge(xi))``
    and, for finite ``r``, ``|grad phi| <= r``.

    Raises
    ------
    InfeasibleMacroGradient
        If ``gauge(xi) >= 1``.
    """
    cfg = cfg or SolverConfig()
    xi = check_matrix(xi, W.shape)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not r > 0:
        raise ValueError("r must be positive")
    g0 = float(W.gauge(xi[None])[0])
    if g0 >= 1.0:
        raise InfeasibleMacroGradient(f"gauge(xi) = {g0:.6g} >= 1")
    res = _resolution(W, resolution)
    mesh = StructuredMesh(W.d, n * res, length=float(n))
    tau = max(cfg.tau_max, g0)
    problem = FieldProblem(mesh, W, xi, mesh.boundary, normalization=float(n) ** W.d, tau=tau, r=r)
    out = minimize_field(problem, cfg, warm_starts)
    feasible = bool(np.isfinite(out.value))
    value = out.value
    diag = {
        "iterations": out.iterations,
        "restarts": out.restarts,
        "best_restart": out.best_restart,
        "slack": out.slack,
        "converged": out.converged,
        "resolution": res,
        "tau": tau,
    }
    return CellSolveResult(value, TestField(mesh, out.field), n, float(r), feasible, diag)


def tiled_start(result: CellSolveResult, n_target: int):
    """Periodic tiling of a cell argmin onto the ``n_target`` mesh (warm start)."""
    src = result.field.mesh
    cells = round(src.cells * n_target / result.n_used)
    dst = StructuredMesh(src.d, cells, length=float(n_target))
    return tile_field(src, result.field.values, dst)


def cell_solves(W, xi, n_max=None, cfg=None, resolution=None, r=np.inf):
    """Cell results for ``n = 1..n_max``; each solve is warm-started with the
    tilings of the argmins found for the divisors of ``n``."""
    n_max = DEFAULT_N_MAX[W.d] if n_max is None else int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    results = []
    for n in range(1, n_max + 1):
        warm = [tiled_start(results[k - 1], n) for k in range(1, n) if n % k == 0]
        results.append(cell_value(W, xi, n, r=r, cfg=cfg, resolution=resolution, warm_starts=warm))
    return results


def hW(W: Integrand, xi, n_max=None, cfg=None, resolution=None, return_results=False):
    """Approximate ``HW(xi)`` by the best cell value over ``n = 1..n_max``.

    Nonincreasing in ``n_max`` by construction. Truncating the infimum over
    all multiplicities biases the value upward.
    """
    results = cell_solves(W, xi, n_max, cfg, resolution)
    value = min(r.value for r in results)
    return (value, results) if return_results else value


def values_over_r(W, xi, r_ladder, n=1, cfg=None, resolution=None):
    """Cell values on an increasing ladder of gradient bounds ``r``.

    Each solve starts from the previous argmin, which stays admissible for
    a larger bound, so the returned values are nonincreasing.
    """
    out, prev = [], None
    for r in sorted(r_ladder):
        warm = [] if prev is None else [prev.field.values]
        prev = cell_value(W, xi, n, r=r, cfg=cfg, resolution=resolution, warm_starts=warm)
        out.append(prev.value)
    return out


def duality_1d_oracle(W: Integrand, xi, n_grid: int = 2001, n_dual: int = 2001, return_info=False):
    """Homogenized value of a convex scalar 1-D energy by conjugate duality.

    For ``d = m = 1`` and ``W(x, .)`` convex,

        W_hom(xi) = sup_s [ s xi - int_Y W*(x, s) dx ],

    with each conjugate computed by a discrete Legendre transform over a
    grid of the domain. The sup is located on an ``s`` grid and then polished
    with a bounded scalar search.
    """
    if W.shape != (1, 1) or W.d != 1:
        raise ValueError("the duality oracle needs d = m = 1")
    xi = float(check_matrix(xi, (1, 1))[0, 0])
    C = W.domain
    if C is None:
        raise ValueError("the duality oracle needs a bounded domain")
    lo = -C.radius if C.kind != "polytope" else float(C._vertices.min())
    hi = C.radius if C.kind != "polytope" else float(C._vertices.max())
    zeta = np.linspace(lo, hi, n_grid)
    f = W.kernel._value(zeta.reshape(-1, 1, 1))
    ok = np.isfinite(f)
    zeta, f = zeta[ok], f[ok]
    if len(zeta) < 3:
        raise ValueError("domain grid too coarse")
    second = np.diff(f, 2)
    if np.any(second < -1e-9 * max(1.0, np.abs(f).max())):
        raise ValueError("kernel is not convex on its domain; duality does not apply")
    weights = np.ones(W.coefficient.samples.size) / W.coefficient.samples.size
    coefs = W.coefficient.samples.ravel()
    slope = np.abs(np.diff(f) / np.diff(zeta)).max() * coefs.max()
    s_max = 1.05 * slope + 1.0

    def conj_mean(s):
        s = np.atleast_1d(s)
        total = np.zeros_like(s)
        for a, w in zip(coefs, weights):
            total += w * np.max(s[:, None] * zeta[None, :] - a * f[None, :], axis=1)
        return total

    s_grid = np.linspace(-s_max, s_max, n_dual)
    obj = np.concatenate([s_grid[i:i + 256] * xi - conj_mean(s_grid[i:i + 256]) for i in range(0, n_dual, 256)])
    k = int(np.argmax(obj))
    a_lo, a_hi = s_grid[max(k - 1, 0)], s_grid[min(k + 1, n_dual - 1)]
    polished = minimize_scalar(lambda s: -(s * xi - conj_mean(s)[0]), bounds=(a_lo, a_hi), method="bounded",
                               options={"xatol": 1e-12})
    value = float(max(obj[k], -polished.fun))
    if return_info:
        return value, {"grid": (float(zeta[0]), float(zeta[-1]), len(zeta)), "s_range": (-s_max, s_max, n_dual),
                       "s_star": float(polished.x)}
    return value


def hWn_sequence(
    W: Integrand,
    xi,
    n_trunc_list,
    schedule: TruncationSchedule | None = None,
    n_max=None,
    cfg=None,
    resolution=None,
    return_hw=False,
):
    """Cell approximations of ``HW_n(xi)`` for the truncations ``W_n``.

    For each multiplicity the untruncated argmin and the argmins for all
    larger truncation indices are offered as warm starts; since
    ``W_n <= W_{n'} <= W`` pointwise, this makes the computed sequence
    nondecreasing in ``n`` and bounded by the computed ``hW``.
    """
    n_max = DEFAULT_N_MAX[W.d] if n_max is None else int(n_max)
    cfg = cfg or SolverConfig()
    order = sorted(set(int(k) for k in n_trunc_list), reverse=True)
    per_k = {k: [] for k in order}
    hw_vals = []
    untrunc = []
    for n in range(1, n_max + 1):
        warm = [tiled_start(untrunc[k - 1], n) for k in range(1, n) if n % k == 0]
        base = cell_value(W, xi, n, cfg=cfg, resolution=resolution, warm_starts=warm)
        untrunc.append(base)
        hw_vals.append(base.value)
        fields = [base.field.values]
        for k in order:
            Wk = TruncatedIntegrand(W, k, schedule)
            res = cell_value(Wk, xi, n, cfg=replace(cfg), resolution=resolution, warm_starts=fields)
            per_k[k].append(res.value)
            fields.append(res.field.values)
    seq = [min(per_k[int(k)]) for k in n_trunc_list]
    return (seq, min(hw_vals)) if return_hw else seq
