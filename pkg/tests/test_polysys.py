import itertools
import math

import numpy as np
import pytest

from certitrack.polysys import (
    AffineSystem,
    PolySystem,
    affine_exponents,
    dehomogenize,
    evaluate,
    evaluate_affine,
    homogeneous_exponents,
    homogeneous_index,
    homogenize,
    jacobian,
    jacobian_affine,
    linear_form,
    parse_system_json,
    space_dimension,
    system_to_json,
    unit_point,
)


def brute_evaluate(h: PolySystem, z) -> np.ndarray:
    """Independent oracle: direct sum over exponent tuples with Python pow."""
    z = np.asarray(z, dtype=np.complex128)
    out = []
    for d, coeff in zip(h.degrees, h.coeffs):
        exps = homogeneous_exponents(h.n_vars, d)
        total = 0.0 + 0.0j
        for pos, row in enumerate(exps):
            term = complex(coeff[pos])
            for j, e in enumerate(row):
                term *= complex(z[j]) ** int(e)
            total += term
        out.append(total)
    return np.array(out)


def fd_jacobian(h: PolySystem, z, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences along each coordinate (holomorphic systems)."""
    z = np.asarray(z, dtype=np.complex128)
    J = np.zeros((h.n, h.n_vars), dtype=np.complex128)
    for j in range(h.n_vars):
        dz = np.zeros_like(z)
        dz[j] = eps
        J[:, j] = (brute_evaluate(h, z + dz) - brute_evaluate(h, z - dz)) / (2 * eps)
    return J


def random_system(degrees, seed):
    rng = np.random.default_rng(seed)
    n_vars = len(degrees) + 1
    coeffs = []
    for d in degrees:
        m = homogeneous_exponents(n_vars, d).shape[0]
        coeffs.append(rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return PolySystem(tuple(degrees), tuple(coeffs))


class TestMonomialBasis:
    @pytest.mark.parametrize("n_vars,degree", [(n, d) for n in range(2, 7) for d in range(1, 7)])
    def test_index_roundtrip(self, n_vars, degree):
        exps = homogeneous_exponents(n_vars, degree)
        index = homogeneous_index(n_vars, degree)
        assert exps.shape[0] == math.comb(n_vars - 1 + degree, degree)
        for pos, row in enumerate(exps):
            key = tuple(int(e) for e in row)
            assert sum(key) == degree
            assert index[key] == pos

    def test_ascending_lex_order(self):
        exps = homogeneous_exponents(3, 2)
        as_tuples = [tuple(int(e) for e in row) for row in exps]
        assert as_tuples == sorted(as_tuples)

    def test_affine_enumeration(self):
        exps = affine_exponents(2, 2)
        as_tuples = [tuple(int(e) for e in row) for row in exps]
        assert as_tuples == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]

    def test_linear_form_positions(self):
        vec = linear_form([10.0, 20.0, 30.0])
        exps = homogeneous_exponents(3, 1)
        for pos, row in enumerate(exps):
            j = int(np.argmax(row))
            assert vec[pos] == pytest.approx([10.0, 20.0, 30.0][j])


class TestSpaceDimension:
    def test_two_quadrics(self):
        assert space_dimension((2, 2)) == 12

    def test_single_linear(self):
        assert space_dimension((1,)) == 2

    def test_three_quadrics(self):
        assert space_dimension((2, 2, 2)) == 30

    def test_bad_degrees(self):
        with pytest.raises(ValueError):
            space_dimension((0, 2))


class TestEvaluate:
    def test_difference_of_squares_at_its_zero(self):
        h = PolySystem.from_terms((2,), [[((0, 2), 1.0), ((2, 0), -1.0)]])
        z = unit_point([1.0, 1.0])
        assert abs(evaluate(h, z)[0]) < 1e-15

    def test_monomial_vanishes(self):
        h = PolySystem.from_terms((2,), [[((2, 0), 1.0)]])
        assert evaluate(h, np.array([0.0, 1.0], dtype=complex))[0] == 0.0

    def test_hand_expansion(self):
        # X0*X1 + X1^2 at (1, 2)/sqrt(5): 2/5 + 4/5 = 6/5
        h = PolySystem.from_terms((2,), [[((1, 1), 1.0), ((0, 2), 1.0)]])
        z = unit_point([1.0, 2.0])
        assert evaluate(h, z)[0] == pytest.approx(1.2, abs=1e-14)

    @pytest.mark.parametrize("degrees,seed", [((2, 2), 0), ((3, 1, 2), 1), ((4,), 2)])
    def test_against_brute_force(self, degrees, seed):
        h = random_system(degrees, seed)
        rng = np.random.default_rng(seed + 100)
        z = rng.standard_normal(h.n_vars) + 1j * rng.standard_normal(h.n_vars)
        got = evaluate(h, z)
        want = brute_evaluate(h, z)
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_homogeneity_scaling(self):
        h = random_system((2, 3), 5)
        rng = np.random.default_rng(6)
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        lam = 0.7 - 1.3j
        scaled = evaluate(h, lam * z)
        base = evaluate(h, z)
        expect = np.array([lam**d for d in h.degrees]) * base
        np.testing.assert_allclose(scaled, expect, rtol=1e-10)

    def test_dimension_mismatch(self):
        h = random_system((2,), 0)
        with pytest.raises(ValueError):
            evaluate(h, np.zeros(3, dtype=complex))


class TestJacobian:
    def test_difference_of_squares_row(self):
        h = PolySystem.from_terms((2,), [[((0, 2), 1.0), ((2, 0), -1.0)]])
        a, b = 0.3 + 0.1j, -0.5 + 0.9j
        J = jacobian(h, np.array([a, b]))
        np.testing.assert_allclose(J[0], [-2 * a, 2 * b], rtol=1e-14)

    def test_bilinear_monomial(self):
        h = PolySystem.from_terms((2,), [[((1, 1), 1.0)]])
        J = jacobian(h, np.array([1.0, 0.0], dtype=complex))
        np.testing.assert_allclose(J[0], [0.0, 1.0], atol=1e-15)

    @pytest.mark.parametrize("degrees,seed", [((2, 2), 3), ((3, 2, 2), 4)])
    def test_against_finite_differences(self, degrees, seed):
        h = random_system(degrees, seed)
        rng = np.random.default_rng(seed + 50)
        z = rng.standard_normal(h.n_vars) + 1j * rng.standard_normal(h.n_vars)
        z /= np.linalg.norm(z)
        np.testing.assert_allclose(jacobian(h, z), fd_jacobian(h, z), rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_euler_identity(self, seed):
        # Dh(z) z = Diag(d_i) h(z) for homogeneous systems
        h = random_system((2, 3), seed)
        rng = np.random.default_rng(seed + 10)
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        z /= np.linalg.norm(z)
        lhs = jacobian(h, z) @ z
        rhs = np.array(h.degrees) * evaluate(h, z)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


class TestHomogenization:
    def test_square_minus_one(self):
        f = AffineSystem.from_terms((2,), [[((2,), 1.0), ((0,), -1.0)]])
        h = homogenize(f)
        # X1^2 - X0^2: affine zero 1 lifts to (1, 1)
        assert abs(evaluate(h, unit_point([1.0, 1.0]))[0]) < 1e-15
        eta = np.array([1.0], dtype=complex)
        assert np.linalg.norm(evaluate_affine(f, eta)) < 1e-15

    def test_linear_with_constant(self):
        f = AffineSystem.from_terms((1,), [[((1,), 1.0), ((0,), 2.0)]])
        h = homogenize(f)
        # x + 2 -> X1 + 2 X0
        val = evaluate(h, np.array([1.0, -2.0], dtype=complex) / math.sqrt(5))
        assert abs(val[0]) < 1e-15

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        coeffs = []
        for d in (2, 3):
            m = affine_exponents(2, d).shape[0]
            coeffs.append(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        f = AffineSystem((2, 3), tuple(coeffs))
        back = dehomogenize(homogenize(f))
        for a, b in zip(f.coeffs, back.coeffs):
            np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_zero_correspondence(self):
        # zero eta of f lifts to (1, eta) for h
        rng = np.random.default_rng(12)
        f = AffineSystem.from_terms(
            (2, 1),
            [
                [((2, 0), 1.0), ((0, 1), -1.0)],  # x^2 - y
                [((1, 0), 1.0), ((0, 1), 1.0), ((0, 0), -2.0)],  # x + y - 2
            ],
        )
        eta = np.array([1.0, 1.0], dtype=complex)  # x=1, y=1
        assert np.linalg.norm(evaluate_affine(f, eta)) < 1e-14
        h = homogenize(f)
        lifted = unit_point(np.concatenate([[1.0], eta]))
        assert np.linalg.norm(evaluate(h, lifted)) < 1e-14

    def test_dehomogenize_pure_power(self):
        h = PolySystem.from_terms((3,), [[((3, 0), 1.0)]])
        f = dehomogenize(h)
        val = evaluate_affine(f, np.array([123.0], dtype=complex))
        assert val[0] == pytest.approx(1.0)


class TestAffineJacobian:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(13)
        coeffs = []
        for d in (2, 2):
            m = affine_exponents(2, d).shape[0]
            coeffs.append(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        f = AffineSystem((2, 2), tuple(coeffs))
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        eps = 1e-6
        J = jacobian_affine(f, x)
        for j in range(2):
            dx = np.zeros(2, dtype=complex)
            dx[j] = eps
            col = (evaluate_affine(f, x + dx) - evaluate_affine(f, x - dx)) / (2 * eps)
            np.testing.assert_allclose(J[:, j], col, rtol=1e-6, atol=1e-8)


class TestUnitPoint:
    def test_normalizes(self):
        z = unit_point([3.0, 4.0])
        assert abs(np.linalg.norm(z) - 1.0) < 1e-12

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            unit_point([0.0, 0.0])

    def test_read_only(self):
        z = unit_point([1.0, 2.0])
        with pytest.raises(ValueError):
            z[0] = 5.0


class TestSystemIO:
    def test_parse_homogeneous(self):
        text = (
            '{"degrees": [2], "terms": [[{"exponents": [1, 1], "re": 1.0, "im": 0.0},'
            ' {"exponents": [0, 2], "re": 0.0, "im": -1.0}]]}'
        )
        h = parse_system_json(text)
        assert isinstance(h, PolySystem)
        z = unit_point([1.0, 2.0])
        assert evaluate(h, z)[0] == pytest.approx((2 - 4j) / 5)

    def test_parse_affine(self):
        text = '{"degrees": [2], "terms": [[{"exponents": [2], "re": 1.0}, {"exponents": [0], "re": -1.0}]]}'
        f = parse_system_json(text)
        assert isinstance(f, AffineSystem)
        assert np.linalg.norm(evaluate_affine(f, np.array([1.0 + 0j]))) < 1e-15

    def test_round_trip(self):
        h = random_system((2, 2), 21)
        back = parse_system_json(system_to_json(h))
        for a, b in zip(h.coeffs, back.coeffs):
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-16)

    def test_rejects_mixed_lengths(self):
        text = (
            '{"degrees": [1, 1], "terms": [[{"exponents": [1, 0], "re": 1.0}],'
            ' [{"exponents": [0, 1, 0], "re": 1.0}]]}'
        )
        with pytest.raises(ValueError):
            parse_system_json(text)

    def test_rejects_wrong_degree(self):
        text = '{"degrees": [2], "terms": [[{"exponents": [1, 0], "re": 1.0}]]}'
        with pytest.raises(ValueError):
            parse_system_json(text)
