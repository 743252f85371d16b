import math

import numpy as np
import pytest

from latdesign.baselines import uniform_random
from latdesign.korobov import search_korobov
from latdesign.lattice import PointSet, RankOneLattice, generate_points, korobov_vector
from latdesign.metrics import (
    covering_radius_estimate,
    has_duplicates,
    lattice_lambda1,
    lattice_metrics,
    lattice_separation_radius,
    mesh_ratio_bound,
    min_pairwise_distance,
    pointset_metrics,
    probe_points,
    projection_diagnostics,
    separation_radius,
    spectral_test,
    write_metrics_csv,
)
from reference import EXPLICIT_D5_ANOMALY


class TestSeparationRadius:
    def test_two_points(self):
        ps = PointSet(2, np.array([[0.0, 0.0], [0.5, 0.5]]))
        assert separation_radius(ps) == pytest.approx(math.sqrt(0.5) / 2)

    def test_lattice_example_matches_lambda1(self):
        lat = RankOneLattice(5, (1, 3))
        ps = generate_points(lat)
        # oracle: all 10 pairwise distances directly
        pts = ps.points
        dists = [
            np.linalg.norm(pts[i] - pts[j])
            for i in range(5) for j in range(i + 1, 5)
        ]
        assert separation_radius(ps) == pytest.approx(min(dists) / 2)
        assert separation_radius(ps) == pytest.approx(math.sqrt(0.2) / 2)
        assert separation_radius(ps) == pytest.approx(
            lattice_lambda1(lat).primal / 2
        )

    def test_duplicates_give_zero_and_flag(self):
        ps = PointSet(2, np.array([[0.1, 0.2], [0.1, 0.2], [0.5, 0.5]]))
        assert separation_radius(ps) == 0.0
        assert has_duplicates(ps)
        metrics = pointset_metrics(ps)
        assert metrics.separation_radius == 0.0
        assert "duplicates" in metrics.flags

    def test_collapsed_projection_of_explicit_design(self):
        info = EXPLICIT_D5_ANOMALY
        lat = RankOneLattice(info["N"], info["z"])
        i, j = info["projection"]
        proj = PointSet(2, generate_points(lat).points[:, (i, j)])
        assert separation_radius(proj) == 0.0
        assert has_duplicates(proj)

    def test_grid_equals_brute_on_random_sets(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n = int(rng.integers(10, 600))
            d = int(rng.integers(2, 5))
            ps = uniform_random(n, d, int(rng.integers(0, 2**31)))
            assert min_pairwise_distance(ps, "brute") == min_pairwise_distance(ps, "grid")

    def test_method_validation(self):
        ps = uniform_random(10, 2, 0)
        with pytest.raises(ValueError):
            min_pairwise_distance(ps, "bogus")
        with pytest.raises(ValueError):
            separation_radius(PointSet(2, np.zeros((1, 2))))


class TestLatticeSeparation:
    def test_matches_brute_force(self):
        cases = [(127, 19, 2), (251, 33, 3), (1021, 798, 2), (61, 16, 4)]
        for n, a, d in cases:
            lat = RankOneLattice(n, korobov_vector(a, n, d))
            fast = lattice_separation_radius(lat)
            brute = separation_radius(generate_points(lat), "brute")
            assert fast == pytest.approx(brute, abs=1e-13)

    def test_at_least_half_lambda1(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(8, 300))
            d = int(rng.integers(2, 5))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            lat = RankOneLattice(n, z)
            assert (
                lattice_separation_radius(lat)
                >= lattice_lambda1(lat).primal / 2 - 1e-12
            )


class TestLambdaAndBounds:
    def test_lambda_example(self):
        lam = lattice_lambda1(RankOneLattice(7, (1, 3)))
        assert lam.primal == pytest.approx(math.sqrt(5) / 7)
        assert lam.dual == pytest.approx(math.sqrt(5))
        assert lam.exact

    def test_identity_lattice(self):
        lam = lattice_lambda1(RankOneLattice(1, (1, 1)))
        assert (lam.primal, lam.dual) == (1.0, 1.0)

    def test_transference_product(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            n = int(rng.integers(2, 300))
            d = int(rng.integers(2, 5))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            lam = lattice_lambda1(RankOneLattice(n, z))
            assert lam.primal * lam.dual <= d + 1e-9

    def test_mesh_ratio_bound_values(self):
        assert mesh_ratio_bound(RankOneLattice(7, (1, 3))) == pytest.approx(
            14 * math.sqrt(2) / 5
        )
        assert mesh_ratio_bound(RankOneLattice(1, (1, 1))) == pytest.approx(
            2 * math.sqrt(2)
        )

    def test_spectral_values(self):
        assert spectral_test(RankOneLattice(7, (1, 3))) == pytest.approx(1 / math.sqrt(5))
        assert spectral_test(RankOneLattice(1, (1, 1))) == 1.0

    def test_spectral_decay_rate_along_ladder(self):
        ns, vals = [], []
        for n in (31, 61, 127, 251, 509, 1021, 2039, 4093, 8191):
            a = search_korobov(n, 2, workers=1).a_star
            lat = RankOneLattice(n, korobov_vector(a, n, 2))
            ns.append(n)
            vals.append(spectral_test(lat))
        slope = np.polyfit(np.log(ns), np.log(vals), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_guard_falls_back_to_lll(self):
        lat = RankOneLattice(11, korobov_vector(3, 11, 9))
        lam = lattice_lambda1(lat)
        assert not lam.exact
        assert "lambda-approximate" in lattice_metrics(lat).flags

    def test_transference_sandwich_with_dual_column_surrogate(self):
        # lambda_d is not computed exactly; the max reduced dual column norm
        # is an upper surrogate, so only the lower inequality is strict and
        # the upper one carries the LLL inflation factor.
        from latdesign.lattice import dual_basis
        from latdesign.lll import lll_reduce

        rng = np.random.default_rng(99)
        for _ in range(30):
            n = int(rng.integers(3, 250))
            d = int(rng.integers(2, 5))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            lat = RankOneLattice(n, z)
            lam = lattice_lambda1(lat)
            red = lll_reduce(dual_basis(lat))
            max_col = max(
                math.sqrt(sum(v * v for v in c)) for c in red.basis.cols
            )
            assert lam.primal * max_col >= 1 - 1e-9
            assert lam.primal * max_col <= d * 2 ** (d - 1) * (1 + 1e-9)


class TestCoveringEstimate:
    def test_single_origin_point(self):
        ps = PointSet(2, np.zeros((1, 2)))
        est = covering_radius_estimate(ps, 4096, seed=0)
        assert est >= 1.40
        assert est <= math.sqrt(2) + 1e-12

    def test_against_fine_grid_oracle(self):
        lat = RankOneLattice(5, (1, 3))
        ps = generate_points(lat)
        est = covering_radius_estimate(ps, 100_000, seed=1)
        g = np.linspace(0.0, 1.0, 2001)
        xx, yy = np.meshgrid(g, g)
        grid = np.column_stack([xx.ravel(), yy.ravel()])
        from scipy.spatial import cKDTree
        oracle = cKDTree(ps.points).query(grid)[0].max()
        assert est <= oracle + 1e-12
        assert est >= 0.95 * oracle

    def test_monotone_in_probes(self):
        ps = uniform_random(50, 2, 3)
        vals = [covering_radius_estimate(ps, k, seed=9) for k in (64, 256, 1024, 4096)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_probe_sets_nested(self):
        small = probe_points(3, 100, seed=4)
        large = probe_points(3, 400, seed=4)
        assert np.array_equal(large[:100], small)


class TestProjectionDiagnostics:
    def test_published_anomaly(self):
        info = EXPLICIT_D5_ANOMALY
        lat = RankOneLattice(info["N"], info["z"])
        rep = projection_diagnostics(lat, *info["projection"])
        assert rep.gcd == info["gcd"]
        assert rep.distinct_points == info["distinct"]
        assert rep.distinct_points == info["N"] // info["gcd"]

    def test_full_rank_projection(self):
        lat = RankOneLattice(7, korobov_vector(3, 7, 3))
        rep = projection_diagnostics(lat, 0, 2)
        assert rep.gcd == 1
        assert rep.distinct_points == 7

    def test_validation(self):
        lat = RankOneLattice(7, (1, 3))
        with pytest.raises(ValueError):
            projection_diagnostics(lat, 0, 0)
        with pytest.raises(ValueError):
            projection_diagnostics(lat, 0, 5)


class TestMetricsRows:
    def test_lattice_metrics_row(self):
        row = lattice_metrics(RankOneLattice(7, (1, 3)), covering_probes=512, seed=0)
        assert row.N == 7 and row.d == 2
        assert row.separation_radius == pytest.approx(math.sqrt(5) / 14)
        assert row.q_scaled == pytest.approx(row.separation_radius * 7**0.5)
        assert row.covering_estimate is not None

    def test_csv_write(self, tmp_path):
        rows = [
            lattice_metrics(RankOneLattice(7, (1, 3))),
            pointset_metrics(uniform_random(20, 2, 0)),
        ]
        path = tmp_path / "m.csv"
        write_metrics_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("N,d,q,q_times_N_pow,lambda1")
        assert len(lines) == 3
        assert lines[2].split(",")[4] == ""  # no lambda for generic sets
