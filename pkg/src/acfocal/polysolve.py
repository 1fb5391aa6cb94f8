"""Univariate and matrix polynomials for the hidden-variable resultant.

The solver reduces its polynomial system to det(C(tau)) = 0 where C is a
square matrix whose cells are polynomials of degree at most two in tau.  The
determinant is never expanded symbolically; it is evaluated at Chebyshev
nodes and interpolated back to power-basis coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InterpolationIllConditioned, ZeroPolynomial

_DEGREE_RTOL = 1e-12


@dataclass(frozen=True)
class UnivariatePolynomial:
    """Dense polynomial with coefficients in ascending degree order."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        """Index of the last coefficient above 1e-12 of the largest magnitude."""
        mags = np.abs(self.coeffs)
        top = mags.max()
        if top == 0.0:
            return 0
        idx = np.nonzero(mags > _DEGREE_RTOL * top)[0]
        return int(idx[-1])

    def coeff(self, k: int) -> float:
        """Coefficient of tau**k, zero beyond the stored list."""
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0.0

    def __call__(self, x):
        acc = np.zeros_like(np.asarray(x, dtype=float))
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)

    def derivative(self) -> "UnivariatePolynomial":
        if len(self.coeffs) == 1:
            return UnivariatePolynomial((0.0,))
        return UnivariatePolynomial(
            tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def truncated(self, max_degree: int) -> "UnivariatePolynomial":
        return UnivariatePolynomial(self.coeffs[:max_degree + 1])


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Square matrix of polynomial cells, stored as degree slabs.

    ``slabs`` has shape (k, n, n) so that M(tau) = sum_d slabs[d] * tau**d,
    with cell degree at most two (k <= 3).
    """

    slabs: np.ndarray

    def __post_init__(self):
        slabs = np.asarray(self.slabs, dtype=float)
        if slabs.ndim != 3 or slabs.shape[1] != slabs.shape[2]:
            raise ValueError("slabs must be a (k, n, n) array")
        if not 1 <= slabs.shape[0] <= 3:
            raise ValueError("cell degree must be at most two")
        if not np.all(np.isfinite(slabs)):
            raise ValueError("matrix polynomial entries must be finite")
        slabs.setflags(write=False)
        object.__setattr__(self, "slabs", slabs)

    @property
    def size(self) -> int:
        return self.slabs.shape[1]

    def cell(self, i: int, j: int) -> UnivariatePolynomial:
        return UnivariatePolynomial(tuple(self.slabs[:, i, j]))

    def evaluate(self, tau: float) -> np.ndarray:
        acc = np.array(self.slabs[-1])
        for slab in self.slabs[-2::-1]:
            acc = acc * tau + slab
        return acc

    def evaluate_many(self, taus: np.ndarray) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        acc = np.broadcast_to(self.slabs[-1], (len(taus),) + self.slabs.shape[1:]).copy()
        for slab in self.slabs[-2::-1]:
            acc = acc * taus[:, None, None] + slab
        return acc


@lru_cache(maxsize=8)
def _cheb_nodes(count: int) -> np.ndarray:
    k = np.arange(count)
    return np.cos((2 * k + 1) * np.pi / (2 * count))


@lru_cache(maxsize=8)
def _vandermonde(count: int) -> np.ndarray:
    return np.vander(_cheb_nodes(count), count, increasing=True)


def det_poly(M: MatrixPolynomial, radius: float = 1.0,
             max_degree: int | None = None) -> UnivariatePolynomial:
    """Determinant of a matrix polynomial via evaluation-interpolation.

    The determinant is evaluated at 2n+1 Chebyshev nodes on [-radius, radius]
    (21 nodes for the 10x10 solver system) and fitted in the scaled variable;
    a radius near the magnitude of the expected roots keeps the fit well
    conditioned.  Coefficients above ``max_degree``, when given, are dropped
    after interpolation.  Raises InterpolationIllConditioned when the fit
    residual exceeds 1e-6 relative to the sampled values.
    """
    if not (np.isfinite(radius) and radius > 0):
        raise ValueError("radius must be positive and finite")
    count = 2 * M.size + 1
    nodes = _cheb_nodes(count)
    values = np.linalg.det(M.evaluate_many(radius * nodes))
    if not np.all(np.isfinite(values)):
        raise InterpolationIllConditioned("determinant samples are not finite")

    V = _vandermonde(count)
    coeffs_scaled = np.linalg.solve(V, values)
    # One step of iterative refinement sharpens the high-degree coefficients.
    coeffs_scaled += np.linalg.solve(V, values - V @ coeffs_scaled)
    residual = np.linalg.norm(V @ coeffs_scaled - values)
    scale = max(np.linalg.norm(values), 1e-300)
    if not np.isfinite(residual) or residual > 1e-6 * scale:
        raise InterpolationIllConditioned(
            f"interpolation residual {residual / scale:.3e} exceeds 1e-6")

    coeffs = coeffs_scaled / radius ** np.arange(count)
    if not np.all(np.isfinite(coeffs)):
        raise InterpolationIllConditioned("interpolated coefficients overflow")
    poly = UnivariatePolynomial(tuple(coeffs))
    if max_degree is not None:
        poly = poly.truncated(max_degree)
    return poly


def real_positive_roots(p: UnivariatePolynomial) -> list:
    """Strictly positive real roots of p, refined, deduplicated, ascending.

    Roots come from the eigenvalues of the companion matrix of the monic
    normalization (with an internal variable rescale for conditioning), keep
    only those whose imaginary part is negligible against the root scale
    (1e-6 of the rescale unit plus the root's own magnitude, so acceptance is
    invariant under variable scaling), receive one Newton step each, and are
    merged when within 1e-9 relative of one another.
    """
    mags = np.abs(p.coeffs)
    if mags.max() == 0.0:
        raise ZeroPolynomial("all coefficients are zero")
    deg = p.degree
    if deg < 1:
        return []
    c = np.asarray(p.coeffs[:deg + 1], dtype=float)

    # Rescale tau = sigma * u so the companion matrix is well balanced even
    # when coefficients span many orders of magnitude.
    sigma = 1.0
    if c[0] != 0.0:
        sigma = (abs(c[0]) / abs(c[deg])) ** (1.0 / deg)
        if not (np.isfinite(sigma) and sigma > 0):
            sigma = 1.0
    scaled = c * sigma ** np.arange(deg + 1)
    roots = np.roots(scaled[::-1]) * sigma

    real_mask = np.abs(roots.imag) <= 1e-6 * (sigma + np.abs(roots.real))
    candidates = roots.real[real_mask]

    if len(candidates):
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = p(candidates) / p.derivative()(candidates)
        accept = np.isfinite(steps) & (np.abs(steps) <= 0.1 * (1.0 + np.abs(candidates)))
        candidates = candidates - np.where(accept, steps, 0.0)

    refined = sorted(float(r) for r in candidates if r > 0.0)
    out = []
    for r in refined:
        if out and r - out[-1] <= 1e-9 * max(abs(r), abs(out[-1])):
            continue
        out.append(r)
    return out
