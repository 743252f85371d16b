"""Rank-1 lattice point sets and exact integer bases for them and their duals.

A rank-1 lattice point set is ``{frac(n*z/N) : n = 0..N-1}`` for a modulus
``N`` and generating vector ``z``.  The infinite lattice behind it is
``(1/N) z Z + Z^d``; all basis arithmetic here is done on the integer lattice
``N * Lambda`` (scale 1/N) so that downstream reduction and enumeration stay
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np


class LatticeError(ValueError):
    """Invalid lattice parameters (gcd condition, dimensions, ranges)."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all 64-bit inputs."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def modular_inverse(a: int, n: int) -> int:
    """Multiplicative inverse of ``a`` modulo ``n``, in [1, n-1].

    Raises LatticeError if gcd(a, n) != 1.
    """
    if n < 2:
        raise LatticeError(f"modulus must be >= 2, got {n}")
    try:
        return pow(a, -1, n)
    except ValueError:
        raise LatticeError(f"{a} is not invertible modulo {n}") from None


def korobov_vector(a: int, n: int, d: int) -> tuple[int, ...]:
    """Generating vector ``(1, a, a^2, ..., a^(d-1)) mod n``."""
    if not 1 <= a <= n - 1:
        raise LatticeError(f"Korobov parameter must be in [1, {n - 1}], got {a}")
    if d < 1:
        raise LatticeError(f"dimension must be >= 1, got {d}")
    out = [1]
    for _ in range(d - 1):
        out.append(out[-1] * a % n)
    return tuple(out)


@dataclass(frozen=True)
class RankOneLattice:
    """Modulus ``N`` and generating vector ``z`` defining the point set.

    ``z`` is kept exactly as given (entries may exceed ``N``); reduction mod
    ``N`` happens at point generation and basis construction.  Requires
    ``gcd(N, z_1, ..., z_d) = 1`` so the point set has ``N`` distinct points.
    """

    N: int
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        if self.N < 1:
            raise LatticeError(f"N must be >= 1, got {self.N}")
        if len(self.z) < 1:
            raise LatticeError("generating vector must have at least one entry")
        if math.gcd(self.N, *self.z) != 1:
            raise LatticeError(
                f"gcd(N, z) must be 1, got gcd={math.gcd(self.N, *self.z)}"
            )

    @property
    def d(self) -> int:
        return len(self.z)

    @property
    def z_mod(self) -> tuple[int, ...]:
        return tuple(v % self.N for v in self.z)


@dataclass(frozen=True)
class IntegerBasis:
    """Square integer matrix whose columns span a lattice, times a scale.

    The real lattice represented is ``scale * (integer span of cols)``.
    """

    dim: int
    cols: tuple[tuple[int, ...], ...]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if len(self.cols) != self.dim or any(len(c) != self.dim for c in self.cols):
            raise LatticeError("basis must be square")
        if self.scale <= 0:
            raise LatticeError("scale must be positive")
        if self.det() == 0:
            raise LatticeError("basis columns are linearly dependent")

    def det(self) -> int:
        return _int_det([[c[i] for c in self.cols] for i in range(self.dim)])

    def column(self, j: int) -> tuple[int, ...]:
        return self.cols[j]

    def as_array(self) -> np.ndarray:
        """Columns as a float array including the scale factor."""
        return np.array(self.cols, dtype=float).T * float(self.scale)

    def gram(self) -> list[list[int]]:
        """Exact Gram matrix of the (unscaled) integer columns."""
        return [[_dot(a, b) for b in self.cols] for a in self.cols]


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(u, v))


def _int_det(rows: list[list[int]]) -> int:
    """Exact determinant via fraction-free (Bareiss) elimination."""
    a = [row[:] for row in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _hermite_column_basis(z_mod: Sequence[int], n_points: int) -> list[list[int]]:
    """Reduce the d x (d+1) generator matrix [z | N*I] to d columns.

    Left-to-right Euclidean column elimination; deterministic.  Returns the
    ``d`` surviving columns spanning ``Z z + N Z^d``.
    """
    d = len(z_mod)
    cols = [list(z_mod)] + [
        [n_points if i == r else 0 for i in range(d)] for r in range(d)
    ]
    for row in range(d):
        while True:
            piv = None
            for j in range(row, len(cols)):
                v = cols[j][row]
                if v != 0 and (piv is None or abs(v) < abs(cols[piv][row])):
                    piv = j
            if piv is None:
                raise LatticeError("generator matrix lost rank")  # unreachable
            if piv != row:
                cols[row], cols[piv] = cols[piv], cols[row]
            done = True
            p = cols[row][row]
            for j in range(row + 1, len(cols)):
                v = cols[j][row]
                if v != 0:
                    q = v // p
                    cj, cr = cols[j], cols[row]
                    for i in range(d):
                        cj[i] -= q * cr[i]
                    if cols[j][row] != 0:
                        done = False
            if done:
                break
        if cols[row][row] < 0:
            cols[row] = [-v for v in cols[row]]
    tail = cols[d]
    if any(tail):
        raise LatticeError("generator matrix has excess rank")  # unreachable
    return cols[:d]


def _coprime_pivot(lat: RankOneLattice) -> Optional[int]:
    """Smallest coordinate index whose entry is coprime to N, if any."""
    for j, v in enumerate(lat.z_mod):
        if math.gcd(v, lat.N) == 1:
            return j
    return None


def primal_basis(lat: RankOneLattice) -> IntegerBasis:
    """Integer basis of ``N * Lambda`` with scale 1/N.

    When some ``z_j`` is coprime to ``N`` (smallest such ``j`` is used), the
    explicit triangular form is built with coordinate ``j`` first and the
    original coordinate order restored afterwards.  Otherwise the generator
    matrix ``[z | N*I]`` is reduced by unimodular column operations.
    """
    n, d = lat.N, lat.d
    z = lat.z_mod
    piv = _coprime_pivot(lat)
    if piv is None:
        cols = _hermite_column_basis(z, n)
    else:
        inv = modular_inverse(z[piv], n) if n > 1 else 0
        order = [piv] + [j for j in range(d) if j != piv]
        first = [0] * d
        for rank, j in enumerate(order):
            first[j] = 1 if rank == 0 else (inv * z[j]) % n
        cols = [first]
        for j in order[1:]:
            cols.append([n if i == j else 0 for i in range(d)])
    basis = IntegerBasis(dim=d, cols=tuple(tuple(c) for c in cols), scale=Fraction(1, n))
    assert abs(basis.det()) == n ** (d - 1)
    return basis


def dual_basis(lat: RankOneLattice) -> IntegerBasis:
    """Integer basis of the dual lattice ``{h : h . z = 0 (mod N)}``, scale 1."""
    n, d = lat.N, lat.d
    z = lat.z_mod
    piv = _coprime_pivot(lat)
    if piv is not None:
        inv = modular_inverse(z[piv], n) if n > 1 else 0
        cols = [[n if i == piv else 0 for i in range(d)]]
        for j in range(d):
            if j == piv:
                continue
            col = [0] * d
            col[piv] = (-inv * z[j]) % n
            col[j] = 1
            cols.append(col)
    else:
        # N * (primal basis)^{-T}: adjugate transpose divided by N^(d-2).
        p = primal_basis(lat)
        adj_t = _adjugate_transpose([list(c) for c in p.cols])
        det = p.det()
        sign = 1 if det > 0 else -1
        denom = n ** (d - 2)
        cols = []
        for col in adj_t:
            if any(v * sign % denom for v in col):
                raise LatticeError("dual basis is not integral")  # unreachable
            cols.append([v * sign // denom for v in col])
    basis = IntegerBasis(dim=d, cols=tuple(tuple(c) for c in cols), scale=Fraction(1))
    assert abs(basis.det()) == n
    return basis


def _adjugate_transpose(cols: list[list[int]]) -> list[list[int]]:
    """Columns of the transposed adjugate of the matrix with the given columns."""
    d = len(cols)
    rows = [[cols[j][i] for j in range(d)] for i in range(d)]
    out = []
    for j in range(d):  # column j of adj^T = cofactors of column j
        col = []
        for i in range(d):
            minor = [
                [rows[r][c] for c in range(d) if c != j]
                for r in range(d) if r != i
            ]
            cof = _int_det(minor) if minor else 1
            col.append(-cof if (i + j) % 2 else cof)
        out.append(col)
    return out


@dataclass(frozen=True)
class PointSet:
    """Points in ``[0,1)^d`` with a provenance label."""

    d: int
    points: np.ndarray
    label: str = "lattice"

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise LatticeError(f"points must be (n, {self.d}), got {pts.shape}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def save_csv(self, path) -> None:
        """One point per row, header x1..xd, 17 significant digits."""
        header = ",".join(f"x{j + 1}" for j in range(self.d))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for row in self.points:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def lattice_residues(lat: RankOneLattice) -> np.ndarray:
    """Integer residue matrix ``r[n, j] = n * z_j mod N`` of shape (N, d)."""
    n_idx = np.arange(lat.N, dtype=np.int64)[:, None]
    z = np.array(lat.z_mod, dtype=np.int64)[None, :]
    return (n_idx * z) % lat.N


def generate_points(
    lat: RankOneLattice, shift: Optional[Sequence[float]] = None
) -> PointSet:
    """Materialize ``x_n = frac(n*z/N + shift)`` for ``n = 0..N-1``."""
    pts = lattice_residues(lat).astype(float) / lat.N
    if shift is not None:
        sh = np.asarray(shift, dtype=float)
        if sh.shape != (lat.d,):
            raise LatticeError(f"shift must have shape ({lat.d},)")
        if np.any(sh < 0) or np.any(sh >= 1):
            raise LatticeError("shift entries must lie in [0, 1)")
        pts = (pts + sh) % 1.0
    return PointSet(d=lat.d, points=pts, label="lattice")
