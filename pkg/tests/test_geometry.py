import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feketedyn.errors import DegenerateLift, InexactDivision, MapSpecError
from feketedyn.geometry import (HomPoly, ProjPoint, RationalMapLift,
                                det_bareiss, hom_eval, load_map_spec,
                                normalize_good_lift, polydiv_exact,
                                spherical_dist, spherical_dist_matrix, wedge)


class TestWedgeAndDistance:
    def test_wedge_antisymmetric(self):
        x, y = (1 + 2j, 3.0), (0.5, -1j)
        assert wedge(x, y) == -wedge(y, x)

    def test_wedge_fixture(self):
        # (1, 0) wedge (0, 1) = 1
        assert wedge((1.0, 0.0), (0.0, 1.0)) == 1.0

    def test_dist_zero_to_infinity(self):
        assert spherical_dist(ProjPoint.from_affine(0),
                              ProjPoint.infinity()) == 1.0

    def test_dist_one_to_minus_one(self):
        # |1*1 - 1*(-1)| / (sqrt2 * sqrt2) = 1
        d = spherical_dist(ProjPoint.from_affine(1), ProjPoint.from_affine(-1))
        assert abs(d - 1.0) <= 1e-15

    def test_dist_zero_to_one(self):
        d = spherical_dist(ProjPoint.from_affine(0), ProjPoint.from_affine(1))
        assert abs(d - 1.0 / math.sqrt(2)) <= 1e-15

    @given(st.complex_numbers(max_magnitude=50, allow_nan=False),
           st.complex_numbers(max_magnitude=50, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_dist_range_and_symmetry(self, a, b):
        x, y = ProjPoint.from_affine(a), ProjPoint.from_affine(b)
        d = spherical_dist(x, y)
        assert 0.0 <= d <= 1.0
        assert d == spherical_dist(y, x)

    def test_dist_matrix_matches_scalar(self):
        pts = [ProjPoint.from_affine(z) for z in (0, 1, 2 + 1j)]
        Z = np.array([[p.x1, p.x2] for p in pts])
        D = spherical_dist_matrix(Z, Z)
        for i, p in enumerate(pts):
            for j, q in enumerate(pts):
                assert abs(D[i, j] - spherical_dist(p, q)) <= 1e-15


class TestHomEval:
    def test_matches_direct_sum(self):
        coeffs = np.array([1.0, -2.0, 3.0])       # X^0Y^2, X^1Y^1, X^2Y^0
        z1, z2 = 0.7 + 0.2j, -1.1 + 0.5j
        direct = sum(c * z1 ** j * z2 ** (2 - j) for j, c in enumerate(coeffs))
        assert abs(hom_eval(coeffs, z1, z2) - direct) <= 1e-14

    @given(st.complex_numbers(max_magnitude=10, allow_nan=False,
                              min_magnitude=1e-3),
           st.complex_numbers(max_magnitude=10, allow_nan=False,
                              min_magnitude=1e-3))
    @settings(max_examples=50, deadline=None)
    def test_homogeneity(self, z1, z2):
        coeffs = np.array([2.0, 1j, -0.5, 3.0])
        lam = 1.7 - 0.3j
        v1 = hom_eval(coeffs, lam * z1, lam * z2)
        v2 = lam ** 3 * hom_eval(coeffs, z1, z2)
        assert abs(v1 - v2) <= 1e-9 * (1 + abs(v2))

    def test_huge_coefficients_no_overflow(self):
        # max-normalized lifts keep partial sums near max|coeff|
        coeffs = np.zeros(201, dtype=complex)
        coeffs[100] = 1e300
        v = hom_eval(coeffs, 1.0 + 0j, 0.5 + 0j)
        assert np.isfinite(v)
        assert abs(v - 1e300 * 0.5 ** 100) <= 1e285


class TestResultant:
    def test_power_map_resultant_one(self, maps):
        assert maps["z2"].resultant == 1

    def test_quadratic_family_resultant_one(self):
        for c in (Fraction(3, 7), Fraction(-5), Fraction(1, 4)):
            assert RationalMapLift.from_affine_quadratic(c).resultant == 1

    def test_diagonal_forms(self):
        f1 = HomPoly.make([0, 0, 2])      # 2 X^2
        f2 = HomPoly.make([3, 0, 0])      # 3 Y^2
        F = RationalMapLift.make(f1, f2)
        assert F.resultant == 36

    def test_degenerate_raises(self):
        f1 = HomPoly.make([0, 1, 0])      # X Y
        f2 = HomPoly.make([1, 0, 0])      # Y^2, shares zero (1, 0)? no: XY and Y^2 share Y
        with pytest.raises(DegenerateLift):
            RationalMapLift.make(f1, f2)

    @given(st.integers(min_value=-5, max_value=5).filter(lambda c: c != 0))
    @settings(max_examples=20, deadline=None)
    def test_scaling_law(self, c):
        # Res(cF) = c^(2d) Res(F) for degree-d pairs
        F = RationalMapLift.from_affine_quadratic(1)
        assert F.scale(Fraction(c)).resultant == Fraction(c) ** 4

    def test_normalize_good_lift(self):
        F = RationalMapLift.from_affine_quadratic(1.0 + 0j).scale(2.0)
        G = normalize_good_lift(F)
        assert abs(complex(G.resultant) - 1.0) <= 1e-9


class TestExactHelpers:
    def test_bareiss_known_determinant(self):
        rows = [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)]]
        assert det_bareiss(rows) == -2

    def test_bareiss_rational_entries(self):
        rows = [[Fraction(1, 2), Fraction(1, 3)],
                [Fraction(1, 5), Fraction(1, 7)]]
        assert det_bareiss(rows) == Fraction(1, 14) - Fraction(1, 15)

    def test_polydiv_exact_roundtrip(self):
        a = [Fraction(x) for x in (1, 2, 3)]
        b = [Fraction(x) for x in (4, 5)]
        prod = [Fraction(0)] * 4
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                prod[i + j] += x * y
        assert polydiv_exact(prod, b) == a

    def test_polydiv_exact_remainder_raises(self):
        with pytest.raises(InexactDivision):
            polydiv_exact([Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)])


class TestIteration:
    def test_second_iterate_of_square(self, maps):
        A, B = maps["z2"].iterate(2)
        assert A.coeffs == (Fraction(0),) * 4 + (Fraction(1),)
        assert B.coeffs == (Fraction(1),) + (Fraction(0),) * 4

    def test_iterate_matches_pointwise(self, maps):
        F = maps["z2m1"]
        A, B = F.iterate(3)
        Z = np.array([[0.3 + 0.1j, 1.0]])
        W = Z
        for _ in range(3):
            W = F.apply(W)
        assert abs(A(Z[0, 0], Z[0, 1]) - W[0, 0]) <= 1e-9 * abs(W[0, 0])
        assert abs(B(Z[0, 0], Z[0, 1]) - W[0, 1]) <= 1e-9 * max(1, abs(W[0, 1]))


class TestMapSpec:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(
            {"degree": 2, "num": ["1", "0", "-1"], "den": ["0", "0", "1"]}))
        F = load_map_spec(str(path))
        assert F.exact and F.degree == 2
        assert F.f1.coeffs == (Fraction(-1), Fraction(0), Fraction(1))

    def test_float_coeffs(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(
            {"degree": 2, "num": [[1, 0], [0, 0], [0, 0.25]],
             "den": [[0, 0], [0, 0], [1, 0]]}))
        F = load_map_spec(str(path))
        assert not F.exact

    @pytest.mark.parametrize("doc", [
        {"degree": 2, "num": ["1", "0"], "den": ["0", "0", "1"]},
        {"degree": 1, "num": ["1", "0"], "den": ["0", "1"]},
        {"num": ["1", "0", "0"], "den": ["0", "0", "1"]},
        {"degree": 2, "num": ["x", "0", "0"], "den": ["0", "0", "1"]},
    ])
    def test_malformed_specs(self, tmp_path, doc):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(MapSpecError):
            load_map_spec(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(MapSpecError):
            load_map_spec(str(tmp_path / "nope.json"))
