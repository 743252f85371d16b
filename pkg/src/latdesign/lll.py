"""LLL basis reduction over exact integers, and an exact shortest-vector oracle.

The reduction keeps all Gram-Schmidt bookkeeping in scaled-integer form
(lambda/d arrays), so results are deterministic and exact for any input size.
The oracle enumerates lattice vectors inside the ball whose radius is the
LLL-shortest norm, Fincke-Pohst style, with exact integer norm checks at the
leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import IntegerBasis, _dot, _int_det


class SingularBasisError(ValueError):
    """Input columns are linearly dependent."""


class OracleInfeasibleError(RuntimeError):
    """Exact enumeration would exceed the dimension or node-count guard."""


@dataclass(frozen=True)
class ReductionResult:
    """LLL-reduced basis of the same lattice.

    ``shortest`` is the first reduced column (the classically guaranteed
    short vector); use :func:`shortest_basis_vector` to scan all columns.
    """

    basis: IntegerBasis
    shortest: tuple[int, ...]
    shortest_norm_sq: int
    swaps: int


def _as_delta(delta) -> Fraction:
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    return delta


def _lll_core(cols: Sequence[Sequence[int]], delta: Fraction):
    """Integral LLL; returns (reduced cols, lam, dv, swaps, transform).

    ``lam[i][j] = mu_ij * dv[j+1]`` and ``dv[k]`` is the Gram determinant of
    the first ``k`` reduced vectors, so ``|b*_i|^2 = dv[i+1]/dv[i]`` exactly.
    """
    n = len(cols)
    b = [list(c) for c in cols]
    lam = [[0] * n for _ in range(n)]
    dv = [1] + [0] * n
    p, q = delta.numerator, delta.denominator
    swaps = 0

    dv[1] = _dot(b[0], b[0])
    if dv[1] == 0:
        raise SingularBasisError("zero column in basis")

    def redi(k: int, l: int) -> None:
        dl = dv[l + 1]
        lkl = lam[k][l]
        if 2 * abs(lkl) > dl:
            r = (2 * lkl + dl) // (2 * dl)
            bk, bl = b[k], b[l]
            for i in range(n):
                bk[i] -= r * bl[i]
            lam[k][l] = lkl - r * dl
            lamk, laml = lam[k], lam[l]
            for j in range(l):
                lamk[j] -= r * laml[j]

    k = 1
    kmax = 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (dv[i + 1] * u - lam[k][i] * lam[j][i]) // dv[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise SingularBasisError("linearly dependent columns")
                    dv[k + 1] = u
        redi(k, k - 1)
        if q * (dv[k + 1] * dv[k - 1] + lam[k][k - 1] ** 2) < p * dv[k] * dv[k]:
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
            lmb = lam[k][k - 1]
            bb = (dv[k - 1] * dv[k + 1] + lmb * lmb) // dv[k]
            for i in range(k + 1, kmax + 1):
                t = lam[i][k]
                lam[i][k] = (dv[k + 1] * lam[i][k - 1] - lmb * t) // dv[k]
                lam[i][k - 1] = (bb * t + lmb * lam[i][k]) // dv[k + 1]
            dv[k] = bb
            swaps += 1
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    return b, lam, dv, swaps


def lll_reduce(basis: IntegerBasis, delta=Fraction(99, 100)) -> ReductionResult:
    """Reduce ``basis`` with Lovasz parameter ``delta`` (default 99/100).

    The reduced basis spans the same lattice (unimodular transform), is
    size-reduced (|mu_ij| <= 1/2) and satisfies the Lovasz condition, so its
    first column is within ``2^((dim-1)/2)`` of the shortest vector.
    """
    delta = _as_delta(delta)
    b, _, _, swaps = _lll_core(basis.cols, delta)
    cols = tuple(tuple(c) for c in b)
    out = IntegerBasis(dim=basis.dim, cols=cols, scale=basis.scale)
    first = cols[0]
    return ReductionResult(
        basis=out,
        shortest=first,
        shortest_norm_sq=_dot(first, first),
        swaps=swaps,
    )


def transform_matrix(original: IntegerBasis, reduced: IntegerBasis) -> list[list[int]]:
    """Integer matrix U with ``original @ U = reduced`` (columns convention)."""
    d = original.dim
    det = original.det()
    adj_rows = _adjugate_rows([list(c) for c in original.cols])
    u = []
    for col in reduced.cols:
        entries = []
        for i in range(d):
            num = sum(adj_rows[i][r] * col[r] for r in range(d))
            if num % det:
                raise ValueError("bases do not span the same lattice")
            entries.append(num // det)
        u.append(entries)
    return [[u[j][i] for j in range(d)] for i in range(d)]


def _adjugate_rows(cols: list[list[int]]) -> list[list[int]]:
    d = len(cols)
    rows = [[cols[j][i] for j in range(d)] for i in range(d)]
    adj = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            minor = [
                [rows[r][c] for c in range(d) if c != i]
                for r in range(d) if r != j
            ]
            cof = _int_det(minor) if minor else 1
            adj[i][j] = -cof if (i + j) % 2 else cof
    return adj


def shortest_basis_vector(r: ReductionResult) -> tuple[tuple[int, ...], float]:
    """Minimum-norm column of the reduced basis and its scaled norm."""
    best = None
    best_sq = None
    for col in r.basis.cols:
        sq = _dot(col, col)
        if best_sq is None or sq < best_sq:
            best, best_sq = col, sq
    return best, math.sqrt(best_sq) * float(r.basis.scale)


MAX_ORACLE_DIM = 8
_NODE_LIMIT = 5_000_000


def _enumerate(cols, lam, dv, bound_sq, collect_all, node_limit=_NODE_LIMIT):
    """All integer-combination vectors with squared norm in (0, bound_sq].

    Float bounds are inflated slightly for pruning; every accepted vector is
    re-checked with exact integer arithmetic.  Returns (best_sq, vectors)
    where ``vectors`` is all achievers of ``best_sq`` when ``collect_all`` is
    False, or every vector within the bound when True.
    """
    n = len(cols)
    bstar2 = [dv[i + 1] / dv[i] for i in range(n)]
    mu = [[lam[i][j] / dv[j + 1] for j in range(i)] for i in range(n)]
    c_float = float(bound_sq) * (1.0 + 1e-9) + 1e-9

    est = 1.0
    for i in range(n):
        est *= 2.0 * math.sqrt(c_float / bstar2[i]) + 1.0
        if est > node_limit:
            raise OracleInfeasibleError(
                f"enumeration tree estimate {est:.3g} exceeds {node_limit}"
            )

    best_sq = bound_sq
    found: list[tuple[int, ...]] = []
    x = [0] * n
    shifts = [0.0] * n  # shifts[i] = sum_{j>i} mu[j][i] * x[j]
    nodes = 0

    def rec(i: int, partial: float) -> None:
        nonlocal best_sq, nodes
        nodes += 1
        if nodes > 4 * node_limit:
            raise OracleInfeasibleError("enumeration node limit exceeded")
        limit = best_sq * (1.0 + 1e-9) + 1e-9 if not collect_all else c_float
        if i < 0:
            v = [0] * n
            for j in range(n):
                xj = x[j]
                if xj:
                    cj = cols[j]
                    for t in range(n):
                        v[t] += xj * cj[t]
            sq = sum(t * t for t in v)
            if 0 < sq <= (bound_sq if collect_all else best_sq):
                vt = tuple(v)
                if collect_all:
                    found.append(vt)
                elif sq < best_sq:
                    best_sq = sq
                    found.clear()
                    found.append(vt)
                else:
                    found.append(vt)
            return
        r = math.sqrt(max(limit - partial, 0.0) / bstar2[i])
        lo = math.ceil(-shifts[i] - r)
        hi = math.floor(-shifts[i] + r)
        for xi in range(lo, hi + 1):
            if i == n - 1 and xi < 0:
                continue  # +/- symmetry: canonical half, mirrored on output
            x[i] = xi
            y = xi + shifts[i]
            contrib = y * y * bstar2[i]
            if partial + contrib > limit:
                continue
            for l in range(i):
                shifts[l] += mu[i][l] * xi
            rec(i - 1, partial + contrib)
            for l in range(i):
                shifts[l] -= mu[i][l] * xi
        x[i] = 0

    rec(n - 1, 0.0)
    with_neg = []
    for v in found:
        with_neg.append(v)
        with_neg.append(tuple(-t for t in v))
    if not collect_all:
        best_now = min((sum(t * t for t in v) for v in with_neg), default=None)
        if best_now is not None:
            with_neg = [v for v in with_neg if sum(t * t for t in v) == best_now]
            best_sq = best_now
    return best_sq, sorted(set(with_neg))


def exact_shortest(
    basis: IntegerBasis, delta=Fraction(99, 100), node_limit=_NODE_LIMIT
) -> tuple[tuple[int, ...], float]:
    """Exact shortest nonzero vector and its scaled norm ``lambda_1``.

    Enumerates exhaustively inside the ball of radius given by the
    LLL-shortest column; ties are broken by lexicographically smallest
    vector.  Raises OracleInfeasibleError when ``dim > 8`` or the pruning
    estimate exceeds ``node_limit``.
    """
    vec, sq = exact_shortest_sq(basis, delta, node_limit)
    return vec, math.sqrt(sq) * float(basis.scale)


def exact_shortest_sq(
    basis: IntegerBasis, delta=Fraction(99, 100), node_limit=_NODE_LIMIT
) -> tuple[tuple[int, ...], int]:
    """Like :func:`exact_shortest` but returns the exact integer norm^2."""
    if basis.dim > MAX_ORACLE_DIM:
        raise OracleInfeasibleError(
            f"enumeration limited to dim <= {MAX_ORACLE_DIM}, got {basis.dim}"
        )
    delta = _as_delta(delta)
    b, lam, dv, _ = _lll_core(basis.cols, delta)
    start_sq = min(_dot(c, c) for c in b)
    best_sq, vecs = _enumerate(b, lam, dv, start_sq, False, node_limit)
    d = basis.dim
    lam1 = math.sqrt(best_sq) * float(basis.scale)
    det = abs(basis.det()) * float(basis.scale) ** d
    assert lam1**d <= minkowski_constant(d) * det * (1 + 1e-9), \
        "Minkowski bound violated: enumeration result cannot be lambda_1"
    return vecs[0], best_sq


def vectors_within(
    basis: IntegerBasis, bound_sq: int, delta=Fraction(99, 100),
    node_limit=_NODE_LIMIT,
) -> list[tuple[tuple[int, ...], int]]:
    """All nonzero lattice vectors with norm^2 <= bound_sq, sorted by norm^2.

    Vectors are in unscaled integer coordinates; both signs are included.
    """
    if basis.dim > MAX_ORACLE_DIM:
        raise OracleInfeasibleError(
            f"enumeration limited to dim <= {MAX_ORACLE_DIM}, got {basis.dim}"
        )
    b, lam, dv, _ = _lll_core(basis.cols, _as_delta(delta))
    _, vecs = _enumerate(b, lam, dv, bound_sq, True, node_limit)
    pairs = [(v, sum(t * t for t in v)) for v in vecs]
    pairs = [(v, sq) for v, sq in pairs if sq <= bound_sq]
    return sorted(pairs, key=lambda p: (p[1], p[0]))


def minkowski_constant(d: int) -> float:
    """``2^d Gamma(1 + d/2) / pi^(d/2)``, the ball-packing constant."""
    return 2.0 ** d * math.gamma(1 + d / 2) / math.pi ** (d / 2)
