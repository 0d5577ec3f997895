"""Input checks shared by the public entry points."""

import numpy as np

from .exceptions import DimensionMismatch


def as_batch(xi, shape):
    """Return ``xi`` as a float array of shape ``(N, m, d)`` plus a flag
    telling whether the caller passed a single matrix.

    Accepts a scalar (only when ``shape == (1, 1)``), an ``(m, d)`` matrix,
    an ``(N, m, d)`` stack, or an ``(N, m*d)`` table of flattened rows.
    """
    m, d = shape
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 0:
        if shape != (1, 1):
            raise DimensionMismatch(f"scalar given for {m}x{d} matrices")
        return arr.reshape(1, 1, 1), True
    if arr.ndim == 2 and arr.shape == (m, d):
        return arr[None], True
    if arr.ndim == 1 and m * d == 1:
        return arr.reshape(-1, 1, 1), False
    if arr.ndim == 2 and arr.shape[1] == m * d:
        return arr.reshape(-1, m, d), False
    if arr.ndim == 3 and arr.shape[1:] == (m, d):
        return arr, False
    raise DimensionMismatch(f"expected {m}x{d} matrices, got array of shape {arr.shape}")


def unbatch(values, single):
    if single:
        return float(values[0])
    return values


def check_matrix(xi, shape):
    """Validate a single ``(m, d)`` matrix and return it as a float array."""
    batch, single = as_batch(xi, shape)
    if not single:
        raise DimensionMismatch(f"expected one {shape[0]}x{shape[1]} matrix")
    return batch[0]


def frobenius(batch):
    return np.sqrt(np.einsum("nij,nij->n", batch, batch))
