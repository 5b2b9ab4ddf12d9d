"""Matrix permanents.

``permanent_naive`` is the literal sum over permutations and serves as the
oracle. ``permanent_ryser`` and ``permanent_batch`` use Ryser's inclusion
exclusion formula with Gray-code ordering of the column subsets, so each
step adds or removes a single column from the running row sums.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError, SizeLimitError

NAIVE_MAX_N = 8


def _square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {a.shape}")
    return a


def permanent_naive(a) -> complex:
    a = _square(a)
    n = a.shape[0]
    if n > NAIVE_MAX_N:
        raise SizeLimitError(f"naive permanent limited to N <= {NAIVE_MAX_N}, got {n}")
    rows = range(n)
    total = 0j
    for sigma in itertools.permutations(range(n)):
        term = 1 + 0j
        for i in rows:
            term *= a[i, sigma[i]]
        total += term
    return complex(total)


def _gray_steps(n):
    """Yield ``(column, +1/-1, parity_sign)`` for k = 1 .. 2^n - 1."""
    gray = 0
    for k in range(1, 1 << n):
        col = (k & -k).bit_length() - 1
        gray ^= 1 << col
        added = 1 if gray >> col & 1 else -1
        sign = -1 if bin(gray).count("1") & 1 else 1
        yield col, added, sign


def permanent_ryser(a) -> complex:
    """Permanent in O(2^n n) operations."""
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    for col, added, sign in _gray_steps(n):
        row_sums += added * a[:, col]
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


def permanent_batch(a) -> np.ndarray:
    """Permanents of a stack of matrices with shape ``(..., n, n)``.

    Every element of the batch goes through the same sequence of floating
    point operations, so results do not depend on how a grid is chunked.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {a.shape}")
    n = a.shape[-1]
    batch = a.shape[:-2]
    if n == 0:
        return np.ones(batch, dtype=complex)
    if n == 1:
        return a[..., 0, 0].copy()
    if n == 2:
        return a[..., 0, 0] * a[..., 1, 1] + a[..., 0, 1] * a[..., 1, 0]
    row_sums = np.zeros(batch + (n,), dtype=complex)
    total = np.zeros(batch, dtype=complex)
    for col, added, sign in _gray_steps(n):
        if added > 0:
            row_sums += a[..., :, col]
        else:
            row_sums -= a[..., :, col]
        prod = row_sums[..., 0].copy()
        for i in range(1, n):
            prod *= row_sums[..., i]
        if sign > 0:
            total += prod
        else:
            total -= prod
    return total if n % 2 == 0 else -total
