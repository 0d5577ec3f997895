"""Estimator-style wrappers over cell problems and envelopes.

Rows of ``X`` are flattened ``m x d`` matrices. ``fit`` runs the expensive
solves at the training gradients; ``predict``/``transform`` reuse them and
solve for any unseen rows.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cell_problem import hW
from .envelopes import laminate_bound, zf_discrete
from .integrand import Integrand, TruncatedIntegrand, eval_W, eval_Wn
from .solver import SolverConfig


def _rows(X, shape):
    X = check_array(X, dtype=float, ensure_all_finite=False)
    m, d = shape
    if X.shape[1] != m * d:
        raise ValueError(f"expected {m * d} columns, got {X.shape[1]}")
    return X.reshape(-1, m, d)


class HomogenizedDensity(RegressorMixin, BaseEstimator):
    """Cell-problem approximation of the homogenized density.

    Parameters
    ----------
    integrand : Integrand
    n_max : int, optional
        Largest cell multiplicity.
    resolution : int, optional
        Elements per unit cell side.
    restarts, tau_max, seed :
        Passed to :class:`SolverConfig`.

    Attributes
    ----------
    values_ : ndarray of shape (n_samples,)
        ``hW`` at the training gradients; ``+inf`` outside the domain.
    """

    def __init__(self, integrand: Integrand | None = None, n_max=None, resolution=None, restarts=8,
                 tau_max=1.0 - 1e-3, seed=0):
        self.integrand = integrand
        self.n_max = n_max
        self.resolution = resolution
        self.restarts = restarts
        self.tau_max = tau_max
        self.seed = seed

    def _solve(self, xi):
        if float(self.integrand.gauge(xi[None])[0]) >= 1.0:
            return np.inf
        cfg = SolverConfig(restarts=self.restarts, tau_max=self.tau_max, seed=self.seed)
        return hW(self.integrand, xi, self.n_max, cfg, self.resolution)

    def fit(self, X, y=None):
        if self.integrand is None:
            raise ValueError("an integrand is required")
        batch = _rows(X, self.integrand.shape)
        self.n_features_in_ = batch.shape[1] * batch.shape[2]
        self.cache_ = {}
        self.values_ = self._lookup(batch)
        return self

    def _lookup(self, batch):
        out = np.empty(len(batch))
        for k, xi in enumerate(batch):
            key = xi.tobytes()
            if key not in self.cache_:
                self.cache_[key] = self._solve(xi)
            out[k] = self.cache_[key]
        return out

    def predict(self, X):
        check_is_fitted(self, "values_")
        return self._lookup(_rows(X, self.integrand.shape))


class EnvelopeTransformer(TransformerMixin, BaseEstimator):
    """Upper bounds of the piecewise-affine envelope of a kernel.

    ``method="discrete"`` minimises over P1 fields on one unit cell;
    ``method="laminate"`` uses iterated rank-one splits of the given depth.
    """

    def __init__(self, kernel=None, method="discrete", resolution=64, depth=1, restarts=8, seed=0):
        self.kernel = kernel
        self.method = method
        self.resolution = resolution
        self.depth = depth
        self.restarts = restarts
        self.seed = seed

    def fit(self, X, y=None):
        if self.kernel is None:
            raise ValueError("a kernel is required")
        if self.method not in ("discrete", "laminate"):
            raise ValueError("method must be 'discrete' or 'laminate'")
        batch = _rows(X, self.kernel.shape)
        self.n_features_in_ = batch.shape[1] * batch.shape[2]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        batch = _rows(X, self.kernel.shape)
        cfg = SolverConfig(restarts=self.restarts, seed=self.seed)
        out = np.empty((len(batch), 1))
        for k, xi in enumerate(batch):
            if self.method == "laminate":
                out[k, 0] = laminate_bound(self.kernel, xi, self.depth).value
            elif self.kernel.domain is not None and float(self.kernel.domain.gauge(xi)) >= 1.0:
                out[k, 0] = np.inf
            else:
                out[k, 0] = zf_discrete(self.kernel, xi, self.resolution, cfg).value
        return out


class DensityTable(TransformerMixin, BaseEstimator):
    """Columns ``W(x, xi)`` and ``W_n(x, xi)`` for each truncation index ``n``.

    ``schedule`` should be certified for the integrand (see
    :func:`periodic_homog.integrand.certified_schedule`); otherwise the
    ordering ``W_n <= W`` is not guaranteed.
    """

    def __init__(self, integrand: Integrand | None = None, x=None, truncations=(1, 2, 4), schedule=None):
        self.integrand = integrand
        self.x = x
        self.truncations = truncations
        self.schedule = schedule

    def fit(self, X, y=None):
        if self.integrand is None:
            raise ValueError("an integrand is required")
        batch = _rows(X, self.integrand.shape)
        self.n_features_in_ = batch.shape[1] * batch.shape[2]
        self.truncated_ = [TruncatedIntegrand(self.integrand, int(n), self.schedule) for n in self.truncations]
        return self

    def transform(self, X):
        check_is_fitted(self, "truncated_")
        batch = _rows(X, self.integrand.shape)
        x = np.zeros(self.integrand.d) if self.x is None else np.asarray(self.x, dtype=float)
        cols = [np.atleast_1d(eval_W(self.integrand, x, batch))]
        cols += [np.atleast_1d(eval_Wn(Wn, x, batch)) for Wn in self.truncated_]
        return np.stack(cols, axis=1)

    def get_feature_names_out(self, input_features=None):
        return np.array(["W"] + [f"W_{int(n)}" for n in self.truncations], dtype=object)


__all__ = ["HomogenizedDensity", "EnvelopeTransformer", "DensityTable"]
