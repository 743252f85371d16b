"""Best simultaneous Diophantine approximations to algebraic root vectors.

Generates the sequence of moduli ``N_1 < N_2 < ...`` at which the distance
``<N alpha>`` (max coordinate-wise distance to the nearest integer) of
``alpha = (p^(1/(d+1)), ..., p^(d/(d+1)))`` strictly improves, together with
the nearest-integer vector ``z ~ N alpha``.  Each ``(N, z)`` pair defines a
rank-1 lattice.

All comparisons are exact: coordinates are kept as fixed-point integers with
``frac_bits`` fractional bits, and a vectorized float64 prefilter (with a
conservative error margin) only decides which candidates need the exact test.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, getcontext
from math import gcd
from typing import Optional

import gmpy2
import numpy as np

from .lattice import RankOneLattice, is_prime

DEFAULT_FRAC_BITS = 192
MIN_FRAC_BITS = 192
_SCREEN_MARGIN = 2.0 ** -20  # >> float64 drift for any N below 2^31
_CHUNK = 1 << 19


class ScanLimitReached(RuntimeError):
    """Raised when the scan hits its limit before improving the distance."""

    def __init__(self, last_scanned: int):
        super().__init__(f"no better approximation found up to N={last_scanned}")
        self.last_scanned = last_scanned


def fixed_root(p: int, num: int, den: int, frac_bits: int) -> int:
    """Fractional part of ``p^(num/den)`` as a ``frac_bits``-bit fixed-point int.

    Computed as the exact integer ``den``-th root of
    ``p^num * 2^(den*frac_bits)``, so the result is the floor of the true
    fraction at this precision (error below one unit in the last place).
    """
    if p < 2 or not 0 < num < den or frac_bits < 1:
        raise ValueError(f"invalid root parameters p={p}, num={num}, den={den}")
    root, _ = gmpy2.iroot(gmpy2.mpz(p) ** num << (den * frac_bits), den)
    return int(root) & ((1 << frac_bits) - 1)


def _root_int_part(p: int, num: int, den: int) -> int:
    root, _ = gmpy2.iroot(gmpy2.mpz(p) ** num, den)
    return int(root)


@dataclass(frozen=True)
class AlgebraicVector:
    """Fixed-point fractional parts of ``(p^(1/(d+1)), ..., p^(d/(d+1)))``."""

    p: int
    d: int
    frac_bits: int
    fracs: tuple[int, ...]
    int_parts: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.frac_bits < MIN_FRAC_BITS:
            raise ValueError(f"frac_bits must be >= {MIN_FRAC_BITS}")
        if len(self.fracs) != self.d or len(self.int_parts) != self.d:
            raise ValueError("component count must equal d")

    def to_float(self, fixed: int) -> float:
        return fixed / (1 << self.frac_bits)


def algebraic_vector(p: int, d: int, frac_bits: int = DEFAULT_FRAC_BITS) -> AlgebraicVector:
    """Build the root vector for a prime ``p`` and dimension ``d``."""
    den = d + 1
    fracs = tuple(fixed_root(p, j, den, frac_bits) for j in range(1, d + 1))
    ints = tuple(_root_int_part(p, j, den) for j in range(1, d + 1))
    return AlgebraicVector(p=p, d=d, frac_bits=frac_bits, fracs=fracs, int_parts=ints)


def kron_distance(n: int, alpha: AlgebraicVector) -> int:
    """Exact fixed-point ``<n alpha>``: max over coordinates of the distance
    of ``n * alpha_j`` to its nearest integer."""
    one = 1 << alpha.frac_bits
    mask = one - 1
    best = 0
    for f in alpha.fracs:
        t = (n * f) & mask
        dist = t if 2 * t <= one else one - t
        if dist > best:
            best = dist
    return best


@dataclass(frozen=True)
class ApproxRecord:
    """One emitted approximation: modulus, rounded vector, achieved distance."""

    index: int
    N: int
    z: tuple[int, ...]
    dist: int
    frac_bits: int

    @property
    def dist_value(self) -> float:
        return self.dist / (1 << self.frac_bits)

    def dist_decimal(self, digits: int = 20) -> str:
        getcontext().prec = digits + 10
        return format(Decimal(self.dist) / Decimal(1 << self.frac_bits), f".{digits}g")

    def to_lattice(self) -> RankOneLattice:
        return RankOneLattice(self.N, self.z)


def _nearest_vector(n: int, alpha: AlgebraicVector) -> tuple[int, ...]:
    b = alpha.frac_bits
    half = 1 << (b - 1)
    return tuple(
        n * ip + ((n * f + half) >> b)
        for ip, f in zip(alpha.int_parts, alpha.fracs)
    )


def _make_record(index: int, n: int, alpha: AlgebraicVector) -> ApproxRecord:
    z = _nearest_vector(n, alpha)
    assert gcd(n, *z) == 1, "minimality must force coprimality"
    return ApproxRecord(index=index, N=n, z=z, dist=kron_distance(n, alpha),
                        frac_bits=alpha.frac_bits)


def first_record(alpha: AlgebraicVector) -> ApproxRecord:
    """The ``N = 1`` starting record."""
    return _make_record(1, 1, alpha)


def next_best_approx(
    alpha: AlgebraicVector,
    prev: ApproxRecord,
    scan_limit: Optional[int] = None,
) -> ApproxRecord:
    """Smallest ``N > prev.N`` with strictly smaller distance.

    Scans linearly; a float64 chunk prefilter discards candidates whose
    distance provably exceeds the threshold, and survivors are settled in
    exact fixed point.  Raises :class:`ScanLimitReached` if ``scan_limit`` is
    passed without an improvement.
    """
    if scan_limit is not None and scan_limit >= 2 ** 31:
        raise ValueError("scan limit beyond 2^31 exceeds prefilter validity")
    one = 1 << alpha.frac_bits
    threshold = prev.dist
    thresh_f = threshold / one
    phi = np.array([f / one for f in alpha.fracs], dtype=np.float64)
    start = prev.N + 1
    while True:
        if scan_limit is not None and start > scan_limit:
            raise ScanLimitReached(scan_limit)
        hi = start + _CHUNK
        if scan_limit is not None:
            hi = min(hi, scan_limit + 1)
        ns = np.arange(start, hi, dtype=np.float64)
        dmax = np.zeros(len(ns))
        for f in phi:
            t = ns * f % 1.0
            np.maximum(dmax, np.minimum(t, 1.0 - t), out=dmax)
        for idx in np.flatnonzero(dmax < thresh_f + _SCREEN_MARGIN):
            n = start + int(idx)
            if kron_distance(n, alpha) < threshold:
                return _make_record(prev.index + 1, n, alpha)
        start = hi


def explicit_sequence(alpha: AlgebraicVector, n_max: int) -> list[ApproxRecord]:
    """All records with ``N_i <= n_max``, starting from ``N_1 = 1``."""
    if n_max < 1:
        return []
    records = [first_record(alpha)]
    while True:
        try:
            records.append(next_best_approx(alpha, records[-1], scan_limit=n_max))
        except ScanLimitReached:
            return records


def consecutive_ratios(records: list[ApproxRecord]) -> list[float]:
    return [b.N / a.N for a, b in zip(records, records[1:])]


def ratio_summary(records: list[ApproxRecord]) -> tuple[float, float, float]:
    """(min, median, max) of consecutive modulus ratios."""
    ratios = consecutive_ratios(records)
    return min(ratios), float(np.median(ratios)), max(ratios)


def write_records_csv(records: list[ApproxRecord], path) -> None:
    """Columns: i, N, z (semicolon-joined), dist to 20 digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,N,z,dist\n")
        for r in records:
            zs = ";".join(str(v) for v in r.z)
            fh.write(f"{r.index},{r.N},{zs},{r.dist_decimal()}\n")
