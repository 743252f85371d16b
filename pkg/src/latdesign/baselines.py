"""Comparison designs: Halton, Sobol', and seeded uniform random points.

Both QMC sequences are zero-indexed with the origin as the first point, and
prefixes are stable: the first N points of a longer run coincide with a
shorter run.  Randomness comes from numpy's PCG64, which has a stable,
platform-independent stream for a given seed.
"""

from __future__ import annotations

import numpy as np

from .lattice import PointSet

HALTON_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                59, 61, 67, 71)

# Sobol' direction-number parameters (primitive polynomial degree s, coefficient
# bits a, initial m values) for dimensions 2..10, from the standard Joe-Kuo
# table; dimension 1 is the van der Corput sequence.
_SOBOL_PARAMS = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
)
_SOBOL_BITS = 32
SOBOL_MAX_DIM = len(_SOBOL_PARAMS) + 1


def halton_point(n: int, d: int) -> np.ndarray:
    """Point ``n`` of the Halton sequence (radical inverses in prime bases)."""
    if d > len(HALTON_BASES):
        raise ValueError(f"Halton supported up to d={len(HALTON_BASES)}")
    out = np.empty(d)
    for j in range(d):
        b = HALTON_BASES[j]
        x, f, k = 0.0, 1.0 / b, n
        while k > 0:
            x += (k % b) * f
            k //= b
            f /= b
        out[j] = x
    return out


def halton(n: int, d: int) -> PointSet:
    """First ``n`` Halton points (index 0 is the origin)."""
    if d > len(HALTON_BASES):
        raise ValueError(f"Halton supported up to d={len(HALTON_BASES)}")
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n, dtype=np.int64)
    pts = np.zeros((n, d))
    for j in range(d):
        b = HALTON_BASES[j]
        k = idx.copy()
        f = 1.0 / b
        while k.any():
            pts[:, j] += (k % b) * f
            k //= b
            f /= b
    return PointSet(d=d, points=pts, label="halton")


def _sobol_directions(dim_index: int) -> np.ndarray:
    """Direction integers ``v_k = m_k * 2^(32-k)`` for one dimension."""
    v = np.zeros(_SOBOL_BITS, dtype=np.uint64)
    if dim_index == 0:
        for k in range(_SOBOL_BITS):
            v[k] = np.uint64(1) << np.uint64(_SOBOL_BITS - 1 - k)
        return v
    s, a, m_init = _SOBOL_PARAMS[dim_index - 1]
    m = list(m_init)
    for k in range(s, _SOBOL_BITS):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    for k in range(_SOBOL_BITS):
        v[k] = np.uint64(m[k]) << np.uint64(_SOBOL_BITS - 1 - k)
    return v


def sobol(n: int, d: int) -> PointSet:
    """First ``n`` Sobol' points by the binary digital construction.

    Point ``k`` XORs the direction numbers selected by the set bits of ``k``,
    so indexing is order-independent and power-of-two prefixes form nets.
    """
    if d > SOBOL_MAX_DIM:
        raise ValueError(f"Sobol supported up to d={SOBOL_MAX_DIM}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n >= 1 << _SOBOL_BITS:
        raise ValueError("n exceeds 32-bit Sobol range")
    idx = np.arange(n, dtype=np.uint64)
    pts = np.empty((n, d))
    scale = 0.5 ** _SOBOL_BITS
    for j in range(d):
        v = _sobol_directions(j)
        acc = np.zeros(n, dtype=np.uint64)
        for bit in range(_SOBOL_BITS):
            sel = (idx >> np.uint64(bit)) & np.uint64(1)
            acc ^= sel * v[bit]
        pts[:, j] = acc * scale
    return PointSet(d=d, points=pts, label="sobol")


def uniform_random(n: int, d: int, seed: int) -> PointSet:
    """``n`` i.i.d. uniform points from PCG64 with the given seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return PointSet(d=d, points=rng.random((n, d)), label="random")
