"""Structured P1 meshes of ``(0, L)^d``: intervals for d=1, squares split into
two triangles along the ``(i, j) -> (i+1, j+1)`` diagonal for d=2.

Element gradients are constant, so a field is fully described by its nodal
values and the sparse operator ``G`` mapping nodal values to per-element
gradients.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class StructuredMesh:
    """Uniform mesh with ``cells`` subdivisions per side on ``(0, length)^d``.

    Attributes
    ----------
    nodes : (n_nodes, d) array
    elements : (n_elem, d+1) int array
    volumes : (n_elem,) array
    barycenters : (n_elem, d) array
    boundary : (n_nodes,) bool array
    G : sparse matrix of shape (n_elem * d, n_nodes)
        Row ``e*d + k`` gives the k-th partial derivative on element ``e``.
    """

    def __init__(self, d, cells, length=1.0):
        if d not in (1, 2):
            raise ValueError("only d = 1 or 2 is supported")
        if cells < 1:
            raise ValueError("need at least one cell per side")
        self.d = int(d)
        self.cells = int(cells)
        self.length = float(length)
        self.h = self.length / self.cells
        if self.d == 1:
            self._build_1d()
        else:
            self._build_2d()
        self.barycenters = self.nodes[self.elements].mean(axis=1)
        self.n_nodes = len(self.nodes)
        self.n_elem = len(self.elements)

    def _build_1d(self):
        N, h = self.cells, self.h
        self.nodes = (np.arange(N + 1) * h)[:, None]
        self.elements = np.stack([np.arange(N), np.arange(1, N + 1)], axis=1)
        self.volumes = np.full(N, h)
        self.boundary = np.zeros(N + 1, dtype=bool)
        self.boundary[[0, N]] = True
        rows = np.repeat(np.arange(N), 2)
        cols = self.elements.ravel()
        vals = np.tile([-1.0 / h, 1.0 / h], N)
        self.G = sp.csr_matrix((vals, (rows, cols)), shape=(N, N + 1))

    def _build_2d(self):
        N, h = self.cells, self.h
        idx = lambda i, j: i + (N + 1) * j  # noqa: E731
        ii, jj = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="xy")
        self.nodes = np.stack([ii.ravel() * h, jj.ravel() * h], axis=1)
        i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="xy")
        i, j = i.ravel(), j.ravel()
        p00, p10, p01, p11 = idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)
        # lower triangle (p00, p10, p11), upper triangle (p00, p11, p01)
        lower = np.stack([p00, p10, p11], axis=1)
        upper = np.stack([p00, p11, p01], axis=1)
        n_sq = len(i)
        self.elements = np.empty((2 * n_sq, 3), dtype=int)
        self.elements[0::2] = lower
        self.elements[1::2] = upper
        self.volumes = np.full(2 * n_sq, 0.5 * h * h)
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        tol = 1e-9 * h
        self.boundary = (x < tol) | (y < tol) | (x > self.length - tol) | (y > self.length - tol)
        e = np.arange(n_sq)
        rows, cols, vals = [], [], []
        # lower: d/dx = (u10 - u00)/h, d/dy = (u11 - u10)/h
        le = 2 * e
        rows += [2 * le, 2 * le, 2 * le + 1, 2 * le + 1]
        cols += [p10, p00, p11, p10]
        vals += [np.full(n_sq, 1 / h), np.full(n_sq, -1 / h), np.full(n_sq, 1 / h), np.full(n_sq, -1 / h)]
        # upper: d/dx = (u11 - u01)/h, d/dy = (u01 - u00)/h
        ue = 2 * e + 1
        rows += [2 * ue, 2 * ue, 2 * ue + 1, 2 * ue + 1]
        cols += [p11, p01, p01, p00]
        vals += [np.full(n_sq, 1 / h), np.full(n_sq, -1 / h), np.full(n_sq, 1 / h), np.full(n_sq, -1 / h)]
        self.G = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * 2 * n_sq, (N + 1) ** 2),
        )

    def gradients(self, u):
        """Per-element gradients of the nodal field ``u`` of shape (n_nodes, m).

        Returns an array of shape (n_elem, m, d).
        """
        g = self.G @ u
        return g.reshape(self.n_elem, self.d, -1).transpose(0, 2, 1)

    def gradients_adjoint(self, s):
        """Adjoint of :meth:`gradients`: element tensors (n_elem, m, d) -> nodal (n_nodes, m)."""
        flat = s.transpose(0, 2, 1).reshape(self.n_elem * self.d, -1)
        return self.G.T @ flat

    def stiffness(self):
        """Scalar P1 Laplacian ``G^T diag(vol) G``."""
        W = sp.diags(np.repeat(self.volumes, self.d))
        return (self.G.T @ W @ self.G).tocsc()

    def grid_index(self, ijk):
        """Node index from integer lattice coordinates (array of shape (n, d))."""
        ijk = np.asarray(ijk)
        if self.d == 1:
            return ijk[..., 0]
        return ijk[..., 0] + (self.cells + 1) * ijk[..., 1]

    def lattice(self):
        """Integer lattice coordinates of every node, shape (n_nodes, d)."""
        return np.rint(self.nodes / self.h).astype(int)

    def interpolate(self, u, points):
        """Evaluate the P1 field ``u`` (n_nodes, m) at ``points`` (n, d) in the mesh."""
        pts = np.clip(np.asarray(points, dtype=float), 0.0, self.length)
        loc = pts / self.h
        base = np.minimum(np.floor(loc).astype(int), self.cells - 1)
        frac = loc - base
        if self.d == 1:
            i = base[:, 0]
            w = frac[:, 0:1]
            return (1 - w) * u[i] + w * u[i + 1]
        i, j = base[:, 0], base[:, 1]
        fx, fy = frac[:, 0:1], frac[:, 1:2]
        N1 = self.cells + 1
        u00, u10 = u[i + N1 * j], u[i + 1 + N1 * j]
        u01, u11 = u[i + N1 * (j + 1)], u[i + 1 + N1 * (j + 1)]
        lower = fx >= fy
        val_lower = u00 + fx * (u10 - u00) + fy * (u11 - u10)
        val_upper = u00 + fy * (u01 - u00) + fx * (u11 - u01)
        return np.where(lower, val_lower, val_upper)


def tile_field(src: StructuredMesh, u, dst: StructuredMesh):
    """Periodically repeat a zero-trace field from ``src`` onto ``dst``.

    ``dst`` must have the same element size and a side length that is an
    integer multiple of ``src``'s.
    """
    if not np.isclose(src.h, dst.h) or dst.cells % src.cells:
        raise ValueError("destination mesh is not a tiling of the source mesh")
    lat = dst.lattice() % src.cells
    return u[src.grid_index(lat)]


def prolong_field(coarse: StructuredMesh, u, fine: StructuredMesh):
    """Exact P1 injection from ``coarse`` into a nested refinement ``fine``."""
    if fine.cells % coarse.cells or not np.isclose(coarse.length, fine.length):
        raise ValueError("fine mesh is not a refinement of the coarse mesh")
    return coarse.interpolate(u, fine.nodes)
