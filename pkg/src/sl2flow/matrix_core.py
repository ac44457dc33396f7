"""Closed-form algebra on 2x2 real matrices.

``Mat2`` stores the four entries row-major.  Every function here is written
entrywise, so a ``Mat2`` whose fields are equally shaped numpy arrays behaves
as a batch of matrices and all operations broadcast over it::

    >>> import numpy as np
    >>> batch = Mat2(*np.random.default_rng(0).normal(size=(4, 1000)))
    >>> det2(batch).shape
    (1000,)
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

#: membership tolerance used when none is given
DEFAULT_TOL = 1e-9


class Mat2(NamedTuple):
    a11: float
    a12: float
    a21: float
    a22: float

    # keep numpy scalars/arrays from treating a Mat2 as a length-4 sequence
    __array_ufunc__ = None

    def __add__(self, other):
        return Mat2(self[0] + other[0], self[1] + other[1],
                    self[2] + other[2], self[3] + other[3])

    def __sub__(self, other):
        return Mat2(self[0] - other[0], self[1] - other[1],
                    self[2] - other[2], self[3] - other[3])

    def __neg__(self):
        return Mat2(-self[0], -self[1], -self[2], -self[3])

    def __mul__(self, s):
        if isinstance(s, Mat2):
            return NotImplemented
        return Mat2(s * self[0], s * self[1], s * self[2], s * self[3])

    __rmul__ = __mul__

    def __truediv__(self, s):
        return Mat2(self[0] / s, self[1] / s, self[2] / s, self[3] / s)

    def __matmul__(self, other):
        a, b, c, d = self
        e, f, g, h = other
        return Mat2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    @property
    def T(self) -> Mat2:
        return Mat2(self[0], self[2], self[1], self[3])

    def to_array(self) -> np.ndarray:
        """Entries as an array of shape ``(..., 2, 2)``."""
        a = np.stack(np.broadcast_arrays(*map(np.asarray, self)), axis=-1)
        return a.reshape(a.shape[:-1] + (2, 2))

    @classmethod
    def from_array(cls, arr) -> Mat2:
        arr = np.asarray(arr, dtype=float)
        if arr.shape[-2:] == (2, 2):
            arr = arr.reshape(arr.shape[:-2] + (4,))
        if arr.shape[-1] != 4:
            raise ValueError(f"expected trailing shape (2, 2) or (4,), got {arr.shape}")
        if arr.ndim == 1:
            return cls(*(float(v) for v in arr))
        return cls(*np.moveaxis(arr, -1, 0))


I = Mat2(1.0, 0.0, 0.0, 1.0)
Z = Mat2(0.0, -1.0, 1.0, 0.0)
K = Mat2(1.0, 0.0, 0.0, -1.0)
M = Mat2(0.0, 1.0, 1.0, 0.0)
ZERO = Mat2(0.0, 0.0, 0.0, 0.0)

BASIS = {"I": I, "Z": Z, "K": K, "M": M}


def inner(A: Mat2, B: Mat2):
    """Euclidean (Frobenius) inner product, tr(A^T B)."""
    return A[0] * B[0] + A[1] * B[1] + A[2] * B[2] + A[3] * B[3]


def norm_sq(A: Mat2):
    return A[0] * A[0] + A[1] * A[1] + A[2] * A[2] + A[3] * A[3]


def norm(A: Mat2):
    return np.sqrt(norm_sq(A)) if isinstance(A[0], np.ndarray) else math.sqrt(norm_sq(A))


def cofactor(A: Mat2) -> Mat2:
    """cof [[a, b], [c, d]] = [[d, -c], [-b, a]]; equals Z A Z^T."""
    return Mat2(A[3], -A[2], -A[1], A[0])


def det2(A: Mat2):
    return A[0] * A[3] - A[1] * A[2]


def trace(A: Mat2):
    return A[0] + A[3]


def inverse(A: Mat2) -> Mat2:
    """A^{-1} = cof(A)^T / det A."""
    d = det2(A)
    return Mat2(A[3] / d, -A[1] / d, -A[2] / d, A[0] / d)


def rotation(theta) -> Mat2:
    """U(theta) = cos(theta) I + sin(theta) Z."""
    c, s = np.cos(theta), np.sin(theta)
    if np.ndim(theta) == 0:
        c, s = float(c), float(s)
    return Mat2(c, -s, s, c)


def is_sl2(A: Mat2, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return bool(abs(det2(A) - 1.0) <= tol)


def is_so2(A: Mat2, tol: float = DEFAULT_TOL) -> bool:
    return is_sl2(A, tol) and bool(abs(norm_sq(A) - 2.0) <= tol)


def tangent_defect(A: Mat2, B: Mat2):
    """<B, cof A>, which is tr(B A^{-1}) on SL(2,R); zero iff B is tangent at A."""
    return inner(B, cofactor(A))


def matvec(A: Mat2, v):
    """A applied to a column vector ``v = (v1, v2)`` (entries may be arrays)."""
    return (A[0] * v[0] + A[1] * v[1], A[2] * v[0] + A[3] * v[1])


def as_mat2(obj) -> Mat2:
    """Coerce a Mat2, a (2, 2) nested sequence, or four numbers into a Mat2."""
    if isinstance(obj, Mat2):
        return obj
    return Mat2.from_array(obj)
