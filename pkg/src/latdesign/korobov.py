"""Exhaustive Korobov parameter search scored by LLL-shortest vector products.

For each candidate ``a`` the lattice with generating vector
``(1, a, ..., a^(d-1)) mod N`` and its dual are reduced, and the product of
the shortest reduced-basis norms (primal scaled by 1/N) is the score; the
search keeps the first maximizer under strict improvement.

The inner loop runs on a numba kernel that keeps the basis in exact int64
arithmetic and uses float64 only for Gram-Schmidt decisions; near-tied
candidates are re-ranked with exact integer squared-norm products, so results
are deterministic and free of floating-point tie ambiguity.  A pure-Python
exact-arithmetic scorer backs the kernel for the (never observed) overflow
path and for cross-checks.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from numba import njit

from .lattice import (
    RankOneLattice,
    dual_basis,
    is_prime,
    korobov_vector,
    primal_basis,
)
from .lll import OracleInfeasibleError, _lll_core, exact_shortest_sq

DEFAULT_DELTA = 0.99
_ENTRY_LIMIT = np.int64(1) << 28
_Q_LIMIT = 2.0 ** 31


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a Korobov parameter search for one ``(N, d)`` pair."""

    N: int
    d: int
    a_star: int
    score: float
    lambda1_primal: float
    lambda1_dual: float
    score_parts: tuple[int, int]  # (primal norm^2 x N^2, dual norm^2), exact
    modulus_is_prime: bool
    elapsed_ms: float
    per_a_scores: Optional[np.ndarray] = None


@njit(cache=True)
def _reduce_min_sq(B, d, delta):
    """In-place LLL on int64 rows; returns exact min row norm^2, or -1.

    Basis updates are exact integer operations; mu/Lovasz decisions use
    float64.  Returns -1 if entries would leave the guarded range.
    """
    bs = np.empty((d, d), np.float64)
    mu = np.empty((d, d), np.float64)
    bstar2 = np.empty(d, np.float64)
    k = 1
    steps = 0
    while k < d:
        steps += 1
        if steps > 100000:
            return np.int64(-1)
        for i in range(k + 1):
            for c in range(d):
                bs[i, c] = B[i, c]
            for j in range(i):
                s = 0.0
                for c in range(d):
                    s += B[i, c] * bs[j, c]
                m = s / bstar2[j]
                mu[i, j] = m
                for c in range(d):
                    bs[i, c] -= m * bs[j, c]
            s = 0.0
            for c in range(d):
                s += bs[i, c] * bs[i, c]
            bstar2[i] = s
        changed = False
        for j in range(k - 1, -1, -1):
            m = mu[k, j]
            if m > 0.5 or m < -0.5:
                if m > _Q_LIMIT or m < -_Q_LIMIT:
                    return np.int64(-1)
                q = np.rint(m)
                qi = np.int64(q)
                for c in range(d):
                    B[k, c] -= qi * B[j, c]
                    if B[k, c] > _ENTRY_LIMIT or B[k, c] < -_ENTRY_LIMIT:
                        return np.int64(-1)
                for l in range(j):
                    mu[k, l] -= q * mu[j, l]
                mu[k, j] -= q
                changed = True
        if changed:
            for c in range(d):
                bs[k, c] = B[k, c]
            for j in range(k):
                s = 0.0
                for c in range(d):
                    s += B[k, c] * bs[j, c]
                m = s / bstar2[j]
                mu[k, j] = m
                for c in range(d):
                    bs[k, c] -= m * bs[j, c]
            s = 0.0
            for c in range(d):
                s += bs[k, c] * bs[k, c]
            bstar2[k] = s
        mkk = mu[k, k - 1]
        if bstar2[k] >= (delta - mkk * mkk) * bstar2[k - 1]:
            k += 1
        else:
            for c in range(d):
                t = B[k, c]
                B[k, c] = B[k - 1, c]
                B[k - 1, c] = t
            k = k - 1 if k > 1 else 1
    best = np.int64(0)
    for i in range(d):
        s = np.int64(0)
        for c in range(d):
            s += B[i, c] * B[i, c]
        if i == 0 or s < best:
            best = s
    return best


@njit(cache=True)
def _score_pair(N, d, a, delta, B, z):
    """Exact (primal*N)^2 and dual^2 shortest reduced norms for one ``a``."""
    z[0] = 1
    for j in range(1, d):
        z[j] = z[j - 1] * a % N
    for i in range(d):
        for c in range(d):
            B[i, c] = 0
    for c in range(d):
        v = z[c]
        if 2 * v > N:
            v -= N
        B[0, c] = v
    for i in range(1, d):
        B[i, i] = N
    p2 = _reduce_min_sq(B, d, delta)
    if p2 < 0:
        return np.int64(-1), np.int64(-1)
    for i in range(d):
        for c in range(d):
            B[i, c] = 0
    B[0, 0] = N
    for j in range(1, d):
        v = z[j]
        if 2 * v > N:
            v -= N
        B[j, 0] = -v
        B[j, j] = 1
    d2 = _reduce_min_sq(B, d, delta)
    if d2 < 0:
        return np.int64(-1), np.int64(-1)
    return p2, d2


@njit(cache=True)
def _scan_max_key(N, d, a_lo, a_hi, delta, overflow_out):
    """Max float score-squared key over ``a in [a_lo, a_hi)``; logs overflows."""
    B = np.empty((d, d), np.int64)
    z = np.empty(d, np.int64)
    max_key = -1.0
    n_over = 0
    for a in range(a_lo, a_hi):
        p2, d2 = _score_pair(N, d, a, delta, B, z)
        if p2 < 0:
            if n_over < overflow_out.shape[0]:
                overflow_out[n_over] = a
            n_over += 1
            continue
        key = float(p2) * float(d2)
        if key > max_key:
            max_key = key
    return max_key, n_over


@njit(cache=True)
def _scan_collect(N, d, a_lo, a_hi, delta, thresh, out_a, out_p2, out_d2):
    """Collect every ``a`` whose float key reaches ``thresh``."""
    B = np.empty((d, d), np.int64)
    z = np.empty(d, np.int64)
    count = 0
    for a in range(a_lo, a_hi):
        p2, d2 = _score_pair(N, d, a, delta, B, z)
        if p2 < 0:
            continue
        if float(p2) * float(d2) >= thresh:
            if count < out_a.shape[0]:
                out_a[count] = a
                out_p2[count] = p2
                out_d2[count] = d2
            count += 1
    return count


@njit(cache=True)
def _scan_all(N, d, a_lo, a_hi, delta, p2_out, d2_out):
    """Per-``a`` exact score parts for diagnostics tables."""
    B = np.empty((d, d), np.int64)
    z = np.empty(d, np.int64)
    for a in range(a_lo, a_hi):
        p2, d2 = _score_pair(N, d, a, delta, B, z)
        p2_out[a - a_lo] = p2
        d2_out[a - a_lo] = d2


def _score_parts_exact(N: int, d: int, a: int, delta) -> tuple[int, int]:
    """Pure-Python exact-arithmetic scorer (same contract as the kernel)."""
    z = [1]
    for _ in range(d - 1):
        z.append(z[-1] * a % N)
    zc = [v - N if 2 * v > N else v for v in z]
    pcols = [zc] + [[N if i == j else 0 for i in range(d)] for j in range(1, d)]
    dcols = [[N if i == 0 else 0 for i in range(d)]]
    for j in range(1, d):
        col = [0] * d
        col[0] = -zc[j]
        col[j] = 1
        dcols.append(col)
    frac = Fraction(delta)
    b1, _, _, _ = _lll_core(pcols, frac)
    p2 = min(sum(x * x for x in c) for c in b1)
    b2, _, _, _ = _lll_core(dcols, frac)
    d2 = min(sum(x * x for x in c) for c in b2)
    return p2, d2


def score_parts(N: int, d: int, a: int, delta: float = DEFAULT_DELTA) -> tuple[int, int]:
    """Exact integer score parts: (shortest |N*v|^2 primal, |h|^2 dual)."""
    if not 1 <= a <= N - 1:
        raise ValueError(f"a must be in [1, {N - 1}], got {a}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    B = np.empty((d, d), np.int64)
    z = np.empty(d, np.int64)
    p2, d2 = _score_pair(N, d, a, delta, B, z)
    if p2 < 0:
        return _score_parts_exact(N, d, a, delta)
    return int(p2), int(d2)


def _score_float(p2: int, d2: int, N: int) -> float:
    return math.sqrt(float(p2) * float(d2)) / N


def korobov_score(N: int, d: int, a: int, delta: float = DEFAULT_DELTA) -> float:
    """LLL-approximate ``lambda_1(L) * lambda_1(L_dual)`` for one parameter."""
    p2, d2 = score_parts(N, d, a, delta)
    return _score_float(p2, d2, N)


def _worker_max(args):
    N, d, lo, hi, delta = args
    over = np.empty(64, np.int64)
    max_key, n_over = _scan_max_key(N, d, lo, hi, delta, over)
    return max_key, [int(v) for v in over[: min(n_over, 64)]], n_over


def _worker_collect(args):
    N, d, lo, hi, delta, thresh, cap = args
    out_a = np.empty(cap, np.int64)
    out_p2 = np.empty(cap, np.int64)
    out_d2 = np.empty(cap, np.int64)
    count = _scan_collect(N, d, lo, hi, delta, thresh, out_a, out_p2, out_d2)
    k = min(count, cap)
    return count, list(zip(out_a[:k].tolist(), out_p2[:k].tolist(), out_d2[:k].tolist()))


def default_workers() -> int:
    env = os.environ.get("LATDESIGN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def warmup() -> None:
    """Force numba compilation outside of timed or forked sections."""
    B = np.empty((2, 2), np.int64)
    z = np.empty(2, np.int64)
    _score_pair(5, 2, 2, DEFAULT_DELTA, B, z)
    over = np.empty(4, np.int64)
    _scan_max_key(5, 2, 1, 3, DEFAULT_DELTA, over)
    _scan_collect(5, 2, 1, 3, DEFAULT_DELTA, 0.0, B[0], B[0].copy(), z)
    _scan_all(5, 2, 1, 3, DEFAULT_DELTA, B[0], z)


def search_korobov(
    N: int,
    d: int,
    delta: float = DEFAULT_DELTA,
    workers: Optional[int] = None,
    keep_scores: bool = False,
) -> SearchResult:
    """Search ``a in {1, ..., N-1}`` for the maximal score, first maximizer.

    Near-maximal candidates identified by the float pass are re-ranked with
    exact integer products, so the returned ``a_star`` is the smallest
    parameter attaining the exact maximum, independent of ``workers``.
    """
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    t0 = time.perf_counter()
    warmup()
    workers = workers if workers is not None else default_workers()

    per_a = None
    if keep_scores:
        p2s = np.empty(N - 1, np.int64)
        d2s = np.empty(N - 1, np.int64)
        _scan_all(N, d, 1, N, delta, p2s, d2s)
        bad = np.flatnonzero(p2s < 0)
        for idx in bad:
            p2, d2 = _score_parts_exact(N, d, int(idx) + 1, delta)
            p2s[idx], d2s[idx] = p2, d2
        keys = p2s.astype(float) * d2s.astype(float)
        per_a = np.sqrt(keys) / N
        candidates = [
            (int(idx) + 1, int(p2s[idx]), int(d2s[idx]))
            for idx in np.flatnonzero(keys >= keys.max() * (1.0 - 1e-9))
        ]
        overflow_as = []
    else:
        chunk = max(2048, (N - 1 + 8 * workers - 1) // (8 * workers))
        ranges = [(lo, min(lo + chunk, N)) for lo in range(1, N, chunk)]
        jobs = [(N, d, lo, hi, delta) for lo, hi in ranges]
        if workers > 1 and len(ranges) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                pass_a = list(pool.map(_worker_max, jobs, chunksize=1))
        else:
            pass_a = [_worker_max(j) for j in jobs]
        max_key = max(r[0] for r in pass_a)
        overflow_as = sorted({a for r in pass_a for a in r[1]})
        if any(r[2] > 64 for r in pass_a):  # pragma: no cover - guarded rescan
            raise RuntimeError("kernel overflow list exceeded; use exact engine")
        thresh = max_key * (1.0 - 1e-9)
        cap = 65536
        hot = [rng for rng, res in zip(ranges, pass_a) if res[0] >= thresh]
        jobs_b = [(N, d, lo, hi, delta, thresh, cap) for lo, hi in hot]
        if workers > 1 and len(jobs_b) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                pass_b = list(pool.map(_worker_collect, jobs_b, chunksize=1))
        else:
            pass_b = [_worker_collect(j) for j in jobs_b]
        if any(cnt > cap for cnt, _ in pass_b):  # pragma: no cover
            raise RuntimeError("candidate buffer exceeded; use exact engine")
        candidates = [item for _, items in pass_b for item in items]

    for a in overflow_as:
        p2, d2 = _score_parts_exact(N, d, a, delta)
        candidates.append((a, p2, d2))
    candidates.sort(key=lambda t: t[0])
    best = None
    for a, p2, d2 in candidates:
        prod = p2 * d2  # exact python int
        if best is None or prod > best[1]:
            best = (a, prod, p2, d2)
    a_star, _, p2, d2 = best
    elapsed = (time.perf_counter() - t0) * 1e3
    return SearchResult(
        N=N,
        d=d,
        a_star=a_star,
        score=_score_float(p2, d2, N),
        lambda1_primal=math.sqrt(float(p2)) / N,
        lambda1_dual=math.sqrt(float(d2)),
        score_parts=(p2, d2),
        modulus_is_prime=is_prime(N),
        elapsed_ms=elapsed,
        per_a_scores=per_a,
    )


EXACT_SEARCH_MAX_N = 600
EXACT_SEARCH_MAX_D = 4


def exact_score_parts(N: int, d: int, a: int) -> tuple[int, int]:
    """True ``(|N lambda_1(L)|^2, lambda_1(L_dual)^2)`` by enumeration."""
    lat = RankOneLattice(N, korobov_vector(a, N, d))
    _, p2 = exact_shortest_sq(primal_basis(lat))
    _, d2 = exact_shortest_sq(dual_basis(lat))
    return p2, d2


def exact_search(N: int, d: int) -> SearchResult:
    """Exhaustive search scored by exact shortest vectors (test oracle)."""
    if N > EXACT_SEARCH_MAX_N or d > EXACT_SEARCH_MAX_D:
        raise OracleInfeasibleError(
            f"exact search limited to N <= {EXACT_SEARCH_MAX_N}, "
            f"d <= {EXACT_SEARCH_MAX_D}"
        )
    if N < 3 or d < 2:
        raise ValueError("exact search requires N >= 3 and d >= 2")
    t0 = time.perf_counter()
    scores = np.empty(N - 1, float)
    best = None
    for a in range(1, N):
        p2, d2 = exact_score_parts(N, d, a)
        scores[a - 1] = _score_float(p2, d2, N)
        prod = p2 * d2
        if best is None or prod > best[1]:
            best = (a, prod, p2, d2)
    a_star, _, p2, d2 = best
    return SearchResult(
        N=N,
        d=d,
        a_star=a_star,
        score=_score_float(p2, d2, N),
        lambda1_primal=math.sqrt(float(p2)) / N,
        lambda1_dual=math.sqrt(float(d2)),
        score_parts=(p2, d2),
        modulus_is_prime=is_prime(N),
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
        per_a_scores=scores,
    )
