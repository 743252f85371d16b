import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latdesign.lattice import (
    IntegerBasis,
    LatticeError,
    RankOneLattice,
    dual_basis,
    generate_points,
    is_prime,
    korobov_vector,
    lattice_residues,
    modular_inverse,
    primal_basis,
)


def solve_integer_combination(basis: IntegerBasis, target):
    """Exact rational solve of cols @ x = target; returns x or None."""
    d = basis.dim
    a = [[Fraction(basis.cols[j][i]) for j in range(d)] + [Fraction(target[i])]
         for i in range(d)]
    for col in range(d):
        piv = next((r for r in range(col, d) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(d):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][d] for r in range(d)]


def spans_same_lattice(b1: IntegerBasis, b2: IntegerBasis) -> bool:
    if abs(b1.det()) != abs(b2.det()) or b1.scale != b2.scale:
        return False
    for col in b2.cols:
        x = solve_integer_combination(b1, col)
        if x is None or any(v.denominator != 1 for v in x):
            return False
    return True


class TestModularInverse:
    def test_identity(self):
        assert modular_inverse(1, 7) == 1

    def test_small(self):
        assert modular_inverse(3, 7) == 5

    def test_random_coprime_pairs(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 50:
            n = int(rng.integers(2, 10**6))
            a = int(rng.integers(1, 10**9))
            if math.gcd(a, n) != 1:
                continue
            r = modular_inverse(a, n)
            assert 1 <= r <= n - 1
            assert a * r % n == 1
            checked += 1

    def test_non_invertible_rejected(self):
        with pytest.raises(LatticeError):
            modular_inverse(6, 9)
        with pytest.raises(LatticeError):
            modular_inverse(0, 5)

    def test_small_modulus_rejected(self):
        with pytest.raises(LatticeError):
            modular_inverse(1, 1)


class TestKorobovVector:
    def test_powers_of_two_mod_seven(self):
        assert korobov_vector(2, 7, 3) == (1, 2, 4)

    def test_identity_parameter(self):
        assert korobov_vector(1, 11, 4) == (1, 1, 1, 1)

    def test_table_row(self):
        assert korobov_vector(3, 7, 2) == (1, 3)

    def test_out_of_range(self):
        with pytest.raises(LatticeError):
            korobov_vector(0, 7, 2)
        with pytest.raises(LatticeError):
            korobov_vector(7, 7, 2)

    def test_prime_modulus_entries_coprime(self):
        for n in (7, 13, 31):
            for a in range(1, n):
                assert all(math.gcd(v, n) == 1 for v in korobov_vector(a, n, 4))


class TestRankOneLattice:
    def test_gcd_violation(self):
        with pytest.raises(LatticeError):
            RankOneLattice(6, (2, 4))

    def test_unreduced_z_preserved(self):
        lat = RankOneLattice(7, (8, 10))
        assert lat.z == (8, 10)
        assert lat.z_mod == (1, 3)

    def test_dimension(self):
        assert RankOneLattice(5, (1, 2, 3)).d == 3


class TestPrimalBasis:
    def test_small_example(self):
        lat = RankOneLattice(7, (1, 3))
        b = primal_basis(lat)
        assert abs(b.det()) == 7
        assert b.scale == Fraction(1, 7)
        x = solve_integer_combination(b, (1, 3))
        assert x is not None and all(v.denominator == 1 for v in x)

    def test_identity_lattice(self):
        b = primal_basis(RankOneLattice(1, (1, 1, 1)))
        assert abs(b.det()) == 1
        assert b.scale == 1
        assert spans_same_lattice(
            b, IntegerBasis(3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        )

    def test_explicit_d5_determinant(self):
        lat = RankOneLattice(138, (17, 36, 57, 81, 108))
        assert abs(primal_basis(lat).det()) == 138**4

    def test_no_single_coprime_component(self):
        # gcd(6, 30) = 6 and gcd(10, 30) = 10, yet gcd(30, 6, 10) = 2 fails;
        # use (6, 10, 15): pairwise share factors but overall gcd is 1.
        lat = RankOneLattice(30, (6, 10, 15))
        b = primal_basis(lat)
        assert abs(b.det()) == 30**2
        x = solve_integer_combination(b, (6, 10, 15))
        assert all(v.denominator == 1 for v in x)

    def test_permuted_coordinates_span_permuted_lattice(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 200))
            d = int(rng.integers(2, 5))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            perm = rng.permutation(d)
            base = primal_basis(RankOneLattice(n, z))
            permuted = primal_basis(RankOneLattice(n, tuple(z[j] for j in perm)))
            reordered = IntegerBasis(
                d,
                tuple(tuple(c[j] for j in perm) for c in base.cols),
                base.scale,
            )
            assert spans_same_lattice(permuted, reordered)
            assert spans_same_lattice(reordered, permuted)


class TestDualBasis:
    def test_membership(self):
        b = dual_basis(RankOneLattice(7, (1, 3)))
        x = solve_integer_combination(b, (1, 2))  # 1 + 3*2 = 7
        assert x is not None and all(v.denominator == 1 for v in x)

    def test_identity_lattice(self):
        b = dual_basis(RankOneLattice(1, (1, 1)))
        assert abs(b.det()) == 1

    def test_det_equals_n(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(2, 500))
            d = int(rng.integers(2, 6))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            assert abs(dual_basis(RankOneLattice(n, z)).det()) == n

    def test_orthogonality_mod_n(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            n = int(rng.integers(2, 300))
            d = int(rng.integers(2, 6))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            lat = RankOneLattice(n, z)
            p, q = primal_basis(lat), dual_basis(lat)
            for pc in p.cols:
                for qc in q.cols:
                    assert sum(a * b for a, b in zip(pc, qc)) % n == 0

    def test_non_coprime_case_dual(self):
        lat = RankOneLattice(30, (6, 10, 15))
        b = dual_basis(lat)
        assert abs(b.det()) == 30
        for col in b.cols:
            assert sum(c * zz for c, zz in zip(col, lat.z_mod)) % 30 == 0


class TestGeneratePoints:
    def test_five_point_example(self):
        pts = generate_points(RankOneLattice(5, (1, 3))).points
        expected = {(0.0, 0.0), (0.2, 0.6), (0.4, 0.2), (0.6, 0.8), (0.8, 0.4)}
        assert {tuple(np.round(p, 12)) for p in pts} == expected

    def test_single_point(self):
        pts = generate_points(RankOneLattice(1, (1, 1))).points
        assert pts.shape == (1, 2)
        assert (pts == 0).all()

    def test_one_dimensional_projections_equidistant(self):
        lat = RankOneLattice(7, (1, 3))
        pts = generate_points(lat).points
        for j in range(2):
            assert sorted(pts[:, j]) == pytest.approx([k / 7 for k in range(7)])

    def test_points_distinct_and_in_unit_cube(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 400))
            d = int(rng.integers(1, 6))
            z = tuple(int(v) for v in rng.integers(0, n, d))
            if math.gcd(n, *z) != 1:
                continue
            pts = generate_points(RankOneLattice(n, z)).points
            assert len(np.unique(pts, axis=0)) == n
            assert (pts >= 0).all() and (pts < 1).all()

    def test_shift(self):
        lat = RankOneLattice(5, (1, 3))
        shifted = generate_points(lat, shift=(0.1, 0.9)).points
        base = generate_points(lat).points
        assert np.allclose(shifted, (base + np.array([0.1, 0.9])) % 1.0)

    def test_bad_shift(self):
        with pytest.raises(LatticeError):
            generate_points(RankOneLattice(5, (1, 3)), shift=(0.5,))
        with pytest.raises(LatticeError):
            generate_points(RankOneLattice(5, (1, 3)), shift=(0.5, 1.5))

    def test_unreduced_z_same_points(self):
        a = generate_points(RankOneLattice(7, (8, 10))).points
        b = generate_points(RankOneLattice(7, (1, 3))).points
        assert np.array_equal(a, b)


class TestPointSetCsv:
    def test_round_trip_precision(self, tmp_path):
        ps = generate_points(RankOneLattice(7, (1, 3)))
        path = tmp_path / "pts.csv"
        ps.save_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,x2"
        back = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]])
        assert np.array_equal(back, ps.points)


@given(
    st.integers(min_value=2, max_value=400),
    st.integers(min_value=1, max_value=5),
    st.randoms(use_true_random=False),
)
@settings(max_examples=40, deadline=None)
def test_residue_matrix_matches_definition(n, d, rnd):
    z = tuple(rnd.randrange(n) for _ in range(d))
    if math.gcd(n, *z) != 1:
        return
    lat = RankOneLattice(n, z)
    res = lattice_residues(lat)
    for n_idx in (0, 1, n - 1, rnd.randrange(n)):
        for j in range(d):
            assert res[n_idx, j] == n_idx * z[j] % n


def test_is_prime_small():
    primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47}
    assert {n for n in range(2, 50) if is_prime(n)} == primes
    assert is_prime(524287)
    assert not is_prime(524289)
