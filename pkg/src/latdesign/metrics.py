"""Space-filling diagnostics: separation radius, shortest vectors, mesh-ratio
bound, spectral test, covering-radius probes, and projection collapse reports.

The separation radius of a generic point set is the exact minimum pairwise
Euclidean distance halved; a grid-bucket accelerator returns the identical
value for large sets.  For lattice point sets the minimum pairwise distance
is found exactly by enumerating short lattice vectors and checking which are
realized by a pair inside the unit cube, which scales to millions of points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .baselines import halton_point
from .lattice import (
    PointSet,
    RankOneLattice,
    dual_basis,
    generate_points,
    lattice_residues,
    primal_basis,
)
from .lll import (
    OracleInfeasibleError,
    exact_shortest_sq,
    lll_reduce,
    shortest_basis_vector,
    vectors_within,
)

_BRUTE_LIMIT = 8192


def _pair_dist_sq(pts: np.ndarray, idx_a: np.ndarray, idx_b: np.ndarray) -> np.ndarray:
    """Squared distances for index pairs, accumulated coordinate by coordinate
    (fixed order keeps brute and grid paths bitwise identical)."""
    acc = np.zeros(len(idx_a))
    for j in range(pts.shape[1]):
        diff = pts[idx_a, j] - pts[idx_b, j]
        acc += diff * diff
    return acc


def _min_pairwise_sq_brute(pts: np.ndarray) -> float:
    n = pts.shape[0]
    best = np.inf
    block = max(1, (1 << 22) // max(n, 1))
    for i0 in range(0, n - 1, block):
        i1 = min(i0 + block, n - 1)
        for i in range(i0, i1):
            acc = np.zeros(n - i - 1)
            for j in range(pts.shape[1]):
                diff = pts[i, j] - pts[i + 1:, j]
                acc += diff * diff
            m = acc.min()
            if m < best:
                best = m
    return float(best)


def _grid_cell_side(n: int, d: int) -> float:
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return 2.0 * (1.0 + math.sqrt(d)) / ball ** (1.0 / d) * n ** (-1.0 / d)


def _min_pairwise_sq_grid(pts: np.ndarray) -> float:
    """Exact min pairwise distance^2 via cell bucketing.

    The cell side is a packing-bound upper estimate of the minimum distance,
    so the closest pair always lies in the same or an adjacent cell.
    """
    n, d = pts.shape
    side = _grid_cell_side(n, d)
    m = int(1.0 / side)
    if m < 2:
        # cells would be wider than half the cube: bucketing gains nothing,
        # and shrinking them below the packing bound would void the
        # adjacent-cell guarantee
        return _min_pairwise_sq_brute(pts)
    cells = np.minimum((pts * m).astype(np.int64), m - 1)
    keys = np.zeros(n, dtype=np.int64)
    for j in range(d):
        keys = keys * m + cells[:, j]
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    starts = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    bounds = np.r_[starts, n]
    bucket = {
        int(sorted_keys[s]): order[s:e] for s, e in zip(bounds[:-1], bounds[1:])
    }
    offsets = [off for off in itertools.product((-1, 0, 1), repeat=d)]
    offsets = [off for off in offsets if off > tuple([0] * d)]

    best = np.inf
    for key, idx in bucket.items():
        if len(idx) > 1:
            ia, ib = np.triu_indices(len(idx), k=1)
            m2 = _pair_dist_sq(pts, idx[ia], idx[ib]).min()
            if m2 < best:
                best = m2
        cell = []
        k = key
        for _ in range(d):
            cell.append(k % m)
            k //= m
        cell = cell[::-1]
        for off in offsets:
            nb = [c + o for c, o in zip(cell, off)]
            if any(c < 0 or c >= m for c in nb):
                continue
            nb_key = 0
            for c in nb:
                nb_key = nb_key * m + c
            other = bucket.get(nb_key)
            if other is None:
                continue
            ia = np.repeat(idx, len(other))
            ib = np.tile(other, len(idx))
            m2 = _pair_dist_sq(pts, ia, ib).min()
            if m2 < best:
                best = m2
    return float(best)


def min_pairwise_distance(ps: PointSet, method: str = "auto") -> float:
    n = len(ps)
    if n < 2:
        raise ValueError("need at least two points")
    if method == "auto":
        method = "brute" if n <= _BRUTE_LIMIT else "grid"
    if method == "brute":
        sq = _min_pairwise_sq_brute(ps.points)
    elif method == "grid":
        sq = _min_pairwise_sq_grid(ps.points)
    else:
        raise ValueError(f"unknown method {method!r}")
    return math.sqrt(sq)


def has_duplicates(ps: PointSet) -> bool:
    return len(np.unique(ps.points, axis=0)) < len(ps)


def separation_radius(ps: PointSet, method: str = "auto") -> float:
    """Half the exact minimum pairwise distance; 0.0 for duplicated points."""
    return 0.5 * min_pairwise_distance(ps, method)


def lattice_min_pairwise_sq(lat: RankOneLattice) -> int:
    """Exact squared minimum pairwise distance of the point set, times N^2.

    Every pairwise difference is a lattice vector; short vectors are
    enumerated in increasing norm and the first one realized by a pair lying
    inside the unit cube gives the minimum.
    """
    n = lat.N
    if n < 2:
        raise ValueError("need at least two points")
    res = lattice_residues(lat)
    sq = res[1:] ** 2
    upper = int(sq.sum(axis=1).min())  # realized: distance from the origin point
    basis = primal_basis(lat)
    for vec, norm_sq in vectors_within(basis, upper):
        mask = np.ones(n, dtype=bool)
        for j, v in enumerate(vec):
            a = max(0, -v)
            b = n - max(0, v)
            mask &= (res[:, j] >= a) & (res[:, j] < b)
            if not mask.any():
                break
        else:
            return norm_sq
    return upper  # pragma: no cover - origin distance is always realized


def lattice_separation_radius(lat: RankOneLattice) -> float:
    return 0.5 * math.sqrt(lattice_min_pairwise_sq(lat)) / lat.N


@dataclass(frozen=True)
class Lambda1Result:
    """Shortest-vector lengths of the lattice and its dual, with exactness."""

    primal: float
    dual: float
    primal_sq_scaled: int  # |N v|^2 for the shortest primal vector
    dual_sq: int
    exact: bool


def lattice_lambda1(lat: RankOneLattice) -> Lambda1Result:
    """Exact ``lambda_1`` of the lattice and its dual; LLL values if the
    enumeration guard trips (flagged via ``exact=False``)."""
    pb, db = primal_basis(lat), dual_basis(lat)
    try:
        _, p2 = exact_shortest_sq(pb)
        _, d2 = exact_shortest_sq(db)
        exact = True
    except OracleInfeasibleError:
        _, pn = shortest_basis_vector(lll_reduce(pb))
        _, dn = shortest_basis_vector(lll_reduce(db))
        return Lambda1Result(
            primal=pn, dual=dn,
            primal_sq_scaled=round(pn * pn * lat.N ** 2), dual_sq=round(dn * dn),
            exact=False,
        )
    return Lambda1Result(
        primal=math.sqrt(p2) / lat.N,
        dual=math.sqrt(d2),
        primal_sq_scaled=p2,
        dual_sq=d2,
        exact=exact,
    )


def mesh_ratio_bound(lat: RankOneLattice) -> float:
    """``d sqrt(d) / (lambda_1(L) lambda_1(L_dual))``, the plotted bound."""
    lam = lattice_lambda1(lat)
    d = lat.d
    return d * math.sqrt(d) / (lam.primal * lam.dual)


def spectral_test(lat: RankOneLattice) -> float:
    """``1 / lambda_1(L_dual)``: max spacing of covering hyperplane families."""
    return 1.0 / lattice_lambda1(lat).dual


def probe_points(d: int, probes: int, seed: int) -> np.ndarray:
    """Deterministic nested probe sequence: cube corners (for small d), then
    alternating low-discrepancy and seeded uniform points."""
    if probes < 1:
        raise ValueError("probes must be >= 1")
    out = np.empty((probes, d))
    k = 0
    if 2 ** d <= 4096:
        for corner in itertools.product((0.0, 1.0), repeat=d):
            if k >= probes:
                break
            out[k] = corner
            k += 1
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, d])))
    h_idx = 0
    r_buf: list[np.ndarray] = []
    while k < probes:
        if (k % 2) == 0:
            out[k] = halton_point(h_idx, d)
            h_idx += 1
        else:
            if not r_buf:
                r_buf = list(rng.random((1024, d)))
            out[k] = r_buf.pop(0)
        k += 1
    return out


def covering_radius_estimate(ps: PointSet, probes: int, seed: int) -> float:
    """Certified lower bound on the covering radius from probe points."""
    grid = probe_points(ps.d, probes, seed)
    tree = cKDTree(ps.points)
    dist, _ = tree.query(grid, k=1)
    return float(dist.max())


@dataclass(frozen=True)
class ProjectionReport:
    """Collapse diagnostics for one coordinate-pair projection."""

    coords: tuple[int, int]
    gcd: int
    distinct_points: int


def projection_diagnostics(lat: RankOneLattice, i: int, j: int) -> ProjectionReport:
    """gcd(N, z_i, z_j) and the distinct-point count of the (i, j) projection."""
    if not (0 <= i < lat.d and 0 <= j < lat.d and i != j):
        raise ValueError("coordinate indices must be distinct and in range")
    z = lat.z_mod
    g = gcd(lat.N, z[i], z[j])
    res = lattice_residues(lat)[:, (i, j)]
    distinct = len(np.unique(res, axis=0))
    return ProjectionReport(coords=(i, j), gcd=g, distinct_points=distinct)


@dataclass(frozen=True)
class DesignMetrics:
    """Space-filling summary for one design."""

    N: int
    d: int
    separation_radius: float
    lambda1_primal: Optional[float]
    lambda1_dual: Optional[float]
    mesh_ratio_bound: Optional[float]
    spectral: Optional[float]
    covering_estimate: Optional[float]
    covering_probes: int
    flags: tuple[str, ...]

    @property
    def q_scaled(self) -> float:
        """``q * N^(1/d)``, the quantity that stays bounded for quasi-uniform
        families."""
        return self.separation_radius * self.N ** (1.0 / self.d)


def lattice_metrics(
    lat: RankOneLattice,
    covering_probes: int = 0,
    seed: int = 0,
) -> DesignMetrics:
    """All diagnostics for a rank-1 lattice design."""
    lam = lattice_lambda1(lat)
    flags = [] if lam.exact else ["lambda-approximate"]
    try:
        q = lattice_separation_radius(lat)
    except OracleInfeasibleError:
        q = separation_radius(generate_points(lat))
    cover = None
    if covering_probes > 0:
        cover = covering_radius_estimate(generate_points(lat), covering_probes, seed)
    return DesignMetrics(
        N=lat.N,
        d=lat.d,
        separation_radius=q,
        lambda1_primal=lam.primal,
        lambda1_dual=lam.dual,
        mesh_ratio_bound=lat.d * math.sqrt(lat.d) / (lam.primal * lam.dual),
        spectral=1.0 / lam.dual,
        covering_estimate=cover,
        covering_probes=covering_probes,
        flags=tuple(flags),
    )


def pointset_metrics(
    ps: PointSet, covering_probes: int = 0, seed: int = 0
) -> DesignMetrics:
    """Diagnostics available for a generic (non-lattice) point set."""
    flags = []
    if has_duplicates(ps):
        q = 0.0
        flags.append("duplicates")
    else:
        q = separation_radius(ps)
    cover = None
    if covering_probes > 0:
        cover = covering_radius_estimate(ps, covering_probes, seed)
    return DesignMetrics(
        N=len(ps),
        d=ps.d,
        separation_radius=q,
        lambda1_primal=None,
        lambda1_dual=None,
        mesh_ratio_bound=None,
        spectral=None,
        covering_estimate=cover,
        covering_probes=covering_probes,
        flags=tuple(flags),
    )


def write_metrics_csv(rows: list[DesignMetrics], path) -> None:
    """Columns: N,d,q,q_times_N_pow,lambda1,lambda1_dual,bound,spectral,covering_est,flags."""

    def fmt(v) -> str:
        return "" if v is None else f"{v:.17g}"

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("N,d,q,q_times_N_pow,lambda1,lambda1_dual,bound,spectral,"
                 "covering_est,flags\n")
        for r in rows:
            fh.write(",".join([
                str(r.N), str(r.d), fmt(r.separation_radius), fmt(r.q_scaled),
                fmt(r.lambda1_primal), fmt(r.lambda1_dual),
                fmt(r.mesh_ratio_bound), fmt(r.spectral),
                fmt(r.covering_estimate), ";".join(r.flags),
            ]) + "\n")
