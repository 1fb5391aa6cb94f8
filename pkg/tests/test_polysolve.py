"""Polynomial plumbing against factored-form and numpy oracles."""

import numpy as np
import numpy.polynomial.polynomial as npoly
import pytest

from acfocal.errors import InterpolationIllConditioned, ZeroPolynomial
from acfocal.polysolve import (
    MatrixPolynomial,
    UnivariatePolynomial,
    det_poly,
    real_positive_roots,
)


def test_univariate_evaluate_matches_numpy():
    rng = np.random.default_rng(0)
    coeffs = rng.normal(size=7)
    p = UnivariatePolynomial(tuple(coeffs))
    xs = rng.normal(size=20)
    assert np.allclose([p(x) for x in xs], npoly.polyval(xs, coeffs))


def test_univariate_derivative():
    p = UnivariatePolynomial((5.0, -2.0, 3.0))  # 5 - 2x + 3x^2
    d = p.derivative()
    xs = np.linspace(-2, 2, 9)
    assert np.allclose([d(x) for x in xs], -2.0 + 6.0 * xs)


def test_univariate_truncated():
    p = UnivariatePolynomial((1.0, 2.0, 3.0, 4.0, 5.0))
    t = p.truncated(2)
    assert t.degree <= 2
    assert np.isclose(t(1.5), 1.0 + 2.0 * 1.5 + 3.0 * 1.5 ** 2)


def test_matrix_polynomial_evaluate():
    rng = np.random.default_rng(1)
    mats = [rng.normal(size=(4, 4)) for _ in range(3)]
    M = MatrixPolynomial(tuple(mats))
    for x in (-0.7, 0.0, 1.3):
        direct = mats[0] + x * mats[1] + x * x * mats[2]
        assert np.allclose(M.evaluate(x), direct)


def test_det_poly_diagonal_product_oracle():
    # diagonal matrix polynomial: determinant is the product of the
    # diagonal entry polynomials, computable independently with numpy
    rng = np.random.default_rng(2)
    diags = [rng.normal(size=3) for _ in range(3)]  # three degree-2 entries
    mats = [np.diag([d[k] for d in diags]) for k in range(3)]
    M = MatrixPolynomial(tuple(mats))
    det = det_poly(M, radius=1.0)
    oracle = npoly.polymul(npoly.polymul(diags[0], diags[1]), diags[2])
    got = np.zeros(len(oracle))
    got[:det.degree + 1] = det.coeffs[:det.degree + 1]
    assert np.allclose(got, oracle, atol=1e-10 * np.abs(oracle).max())


def test_det_poly_triangular_product_oracle():
    rng = np.random.default_rng(3)
    diags = [rng.normal(size=3) for _ in range(4)]
    mats = []
    for k in range(3):
        m = np.triu(rng.normal(size=(4, 4)), k=1)
        m[np.diag_indices(4)] = [d[k] for d in diags]
        mats.append(m)
    M = MatrixPolynomial(tuple(mats))
    det = det_poly(M, radius=1.0)
    oracle = diags[0]
    for d in diags[1:]:
        oracle = npoly.polymul(oracle, d)
    got = np.zeros(len(oracle))
    got[:det.degree + 1] = det.coeffs[:det.degree + 1]
    assert np.allclose(got, oracle, atol=1e-9 * np.abs(oracle).max())


def test_det_poly_max_degree_truncates():
    rng = np.random.default_rng(4)
    mats = [rng.normal(size=(3, 3)) for _ in range(3)]
    M = MatrixPolynomial(tuple(mats))
    assert det_poly(M, max_degree=4).degree <= 4


def test_det_poly_radius_invariance():
    rng = np.random.default_rng(5)
    mats = [rng.normal(size=(3, 3)) for _ in range(3)]
    M = MatrixPolynomial(tuple(mats))
    a = det_poly(M, radius=1.0)
    b = det_poly(M, radius=7.5)
    n = max(a.degree, b.degree) + 1
    ca = np.zeros(n); ca[:a.degree + 1] = a.coeffs[:a.degree + 1]
    cb = np.zeros(n); cb[:b.degree + 1] = b.coeffs[:b.degree + 1]
    assert np.allclose(ca, cb, rtol=1e-8, atol=1e-9 * np.abs(ca).max())


def test_det_poly_rejects_bad_radius():
    M = MatrixPolynomial((np.eye(3),))
    with pytest.raises(ValueError):
        det_poly(M, radius=0.0)
    with pytest.raises(ValueError):
        det_poly(M, radius=np.inf)


def test_det_poly_identically_singular():
    # two equal rows at every evaluation point: determinant vanishes
    row = np.array([[1.0, 2.0, 3.0]])
    m0 = np.vstack([row, row, [[0.0, 1.0, 0.0]]])
    m1 = np.vstack([row, row, [[1.0, 0.0, 2.0]]])
    M = MatrixPolynomial((m0, m1))
    det = det_poly(M)
    assert np.allclose(det.coeffs, 0.0, atol=1e-12)
    with pytest.raises(ZeroPolynomial):
        real_positive_roots(det)


def test_real_positive_roots_factored_oracle():
    # roots planted at 0.5 and 2.0 among a negative root and a complex pair
    coeffs = npoly.polyfromroots([0.5, 2.0, -1.0, 1.0j, -1.0j]).real
    roots = real_positive_roots(UnivariatePolynomial(tuple(coeffs)))
    assert np.allclose(roots, [0.5, 2.0], rtol=1e-9)


def test_real_positive_roots_keeps_order_and_dedupes():
    coeffs = npoly.polyfromroots([3.0, 1.0, 1.0])  # double root at 1
    roots = real_positive_roots(UnivariatePolynomial(tuple(coeffs)))
    assert len(roots) == 2
    assert np.allclose(roots, [1.0, 3.0], rtol=1e-6)


def test_real_positive_roots_tiny_scale():
    # root magnitudes around 1e-6 (the natural scale of 1/f^2)
    planted = [2.5e-6, 7.0e-6]
    coeffs = npoly.polyfromroots(planted + [-1e-6])
    roots = real_positive_roots(UnivariatePolynomial(tuple(coeffs)))
    assert np.allclose(roots, planted, rtol=1e-9)


def test_real_positive_roots_coefficient_scale_invariance():
    base = npoly.polyfromroots([0.5, 2.0, -3.0])
    for scale in (1e-12, 1.0, 1e12):
        roots = real_positive_roots(UnivariatePolynomial(tuple(base * scale)))
        assert np.allclose(roots, [0.5, 2.0], rtol=1e-9)


def test_zero_polynomial_raises():
    with pytest.raises(ZeroPolynomial):
        real_positive_roots(UnivariatePolynomial((0.0, 0.0, 0.0)))
