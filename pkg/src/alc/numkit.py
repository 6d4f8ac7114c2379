"""Dense-matrix kernel and seeded randomness.

Matrices are plain two-dimensional float64 numpy arrays. All operations are
pure functions and safe for concurrent use. Randomness goes through
:class:`RngStream`, a thin wrapper around numpy's PCG64 generator; PCG64 is
seedable and produces the same draw sequence on every platform, which is what
makes whole experiments reproducible. A stream must be consumed by a single
owner; parallel code forks independent child streams instead of sharing one.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ShapeError


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array, rejecting empty or misshaped input."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {m.shape}")
    return m


def matmul(a, b):
    """Matrix product, with a shape check that names both operands."""
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def mean_all(m):
    """Mean of all entries."""
    return float(as_matrix(m).mean())


def relu(m):
    """Elementwise max(0, x)."""
    return np.maximum(as_matrix(m), 0.0)


def softmax_rows(m):
    """Row-wise softmax with max-subtraction so large entries cannot overflow."""
    m = as_matrix(m)
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class RngStream:
    """Deterministic random stream (PCG64) identified by a 64-bit seed.

    ``child(*key)`` derives an independent stream from the same seed and an
    arbitrary integer key path, so parallel work units can each own a stream
    without coordinating draw order.
    """

    def __init__(self, seed, _key=()):
        self.seed = int(seed)
        self._key = tuple(int(k) for k in _key)
        seq = np.random.SeedSequence([self.seed, *self._key])
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def child(self, *key):
        return RngStream(self.seed, _key=self._key + tuple(key))

    def uniform(self, lo, hi, size=None):
        return self._gen.uniform(lo, hi, size=size)

    def shuffle(self, a):
        self._gen.shuffle(a)

    def permutation(self, n):
        return self._gen.permutation(n)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self._key})"


def rng_uniform(rng, lo, hi, rows, cols):
    """Matrix of i.i.d. uniform draws in [lo, hi)."""
    if not lo < hi:
        raise ParameterError(f"uniform range requires lo < hi, got [{lo}, {hi})")
    if rows < 1 or cols < 1:
        raise ParameterError(f"matrix dimensions must be positive, got {rows}x{cols}")
    return rng.uniform(lo, hi, size=(rows, cols))
