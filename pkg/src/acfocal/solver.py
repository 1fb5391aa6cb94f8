"""Minimal solver: focal length and fundamental matrix from two affine
correspondences.

Each correspondence contributes three linear constraints on vec(F): two from
the local affinity and one from the epipolar constraint, leaving a
3-dimensional null space F = alpha A + beta B + gamma C.  Substituting into
det(F) = 0 and the semi-calibrated trace constraint
2 F Q F^T Q F - tr(F Q F^T Q) F = 0 with Q = diag(1, 1, tau), tau = f**-2,
yields ten cubic equations whose 10x10 coefficient matrix C(tau) must be
singular; det(C(tau)) is a degree-15 polynomial whose positive real roots are
the focal-length candidates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, NoRealRoot
from .geometry import AffineCorrespondence, normalize_fundamental, trace_residual
from .polysolve import MatrixPolynomial, det_poly, real_positive_roots

_MAX_RESULTANT_DEGREE = 15

# Monomial order for cubic forms in (alpha, beta, gamma).
_MONOMIAL_EXPONENTS = (
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
)
_MONOMIAL_INDEX = {e: i for i, e in enumerate(_MONOMIAL_EXPONENTS)}

_TRIPLES = list(itertools.product(range(3), repeat=3))
_TRIPLE_MONO = np.array([
    _MONOMIAL_INDEX[(t.count(0), t.count(1), t.count(2))] for t in _TRIPLES])
_I_IDX = np.array([t[0] for t in _TRIPLES])
_J_IDX = np.array([t[1] for t in _TRIPLES])
_K_IDX = np.array([t[2] for t in _TRIPLES])

# Bucket matrix folding the 27 ordered basis triples onto the 10 monomials.
_TRIPLE_FOLD = np.zeros((10, 27))
_TRIPLE_FOLD[_TRIPLE_MONO, np.arange(27)] = 1.0

_Q0 = np.diag([1.0, 1.0, 0.0])
_Q1 = np.diag([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class GateFlags:
    """Which elimination gates a candidate has passed (None = not evaluated)."""

    physical: bool | None = None
    observability: bool | None = None


@dataclass(frozen=True, eq=False)
class CandidateSolution:
    """One root of the resultant with its reconstructed fundamental matrix."""

    focal: float
    tau: float
    fundamental: np.ndarray
    coefficients: tuple
    trace_residual_norm: float
    gate_flags: GateFlags = GateFlags()


@dataclass(frozen=True, eq=False)
class NullBasis:
    """Orthonormal basis vectors of the 3-dimensional null space of the system."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def stack(self) -> np.ndarray:
        """Basis as a 9x3 matrix with columns a, b, c."""
        return np.column_stack([self.a, self.b, self.c])


def build_rows(ac: AffineCorrespondence) -> np.ndarray:
    """The 3x9 constraint block of one affine correspondence on vec(F).

    Rows: the two affinity-induced constraints followed by the epipolar one,
    against F flattened row-major.
    """
    u1, v1 = ac.points.u1, ac.points.v1
    u2, v2 = ac.points.u2, ac.points.v2
    a1, a2, a3, a4 = ac.affinity.a1, ac.affinity.a2, ac.affinity.a3, ac.affinity.a4
    return np.array([
        [u2 + a1 * u1, a1 * v1, a1, v2 + a3 * u1, a3 * v1, a3, 1.0, 0.0, 0.0],
        [a2 * u1, u2 + a2 * v1, a2, a4 * u1, v2 + a4 * v1, a4, 0.0, 1.0, 0.0],
        [u1 * u2, v1 * u2, u2, u1 * v2, v1 * v2, v2, u1, v1, 1.0],
    ])


def build_system(ac1: AffineCorrespondence, ac2: AffineCorrespondence) -> np.ndarray:
    """Stacked 6x9 constraint system of the two correspondences."""
    return np.vstack([build_rows(ac1), build_rows(ac2)])


def null_basis(system: np.ndarray) -> NullBasis:
    """Orthonormal basis of the right null space of the 6x9 system.

    Raises DegenerateConfiguration when the null space exceeds three
    dimensions (system rank below six within 1e-8 relative).
    """
    system = np.asarray(system, dtype=float)
    if system.shape != (6, 9):
        raise ValueError("expected a 6x9 constraint system")
    _, s, Vt = np.linalg.svd(system)
    if s[5] <= 1e-8 * s[0]:
        raise DegenerateConfiguration("constraint system is rank deficient")
    return NullBasis(Vt[6], Vt[7], Vt[8])


def cubic_monomials(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Vector of the ten cubic monomials in the fixed solver order."""
    return np.array([
        alpha ** i * beta ** j * gamma ** k for i, j, k in _MONOMIAL_EXPONENTS])


# Rows of the 3x6 flattening: variable i times the six quadratic monomials.
_FLATTEN_ROWS = np.array([
    [0, 1, 2, 3, 4, 5],
    [1, 3, 4, 6, 7, 8],
    [2, 4, 5, 7, 8, 9],
])


def coefficients_from_monomials(y: np.ndarray) -> tuple:
    """Recover unit-norm (alpha, beta, gamma) from a cubic monomial vector.

    Reading off variable i times the six quadratic monomials arranges y into
    a 3x6 slice that is rank one exactly when y carries cubic structure, with
    the coefficient vector as its left factor.  The leading left singular
    vector is the least-squares recovery; the cube terms fix its sign.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("monomial vector is not finite")
    flat = y[_FLATTEN_ROWS]
    U, s, _ = np.linalg.svd(flat)
    if s[0] == 0.0:
        raise ValueError("monomial vector is zero")
    vec = U[:, 0]
    if np.array([y[0], y[6], y[9]]) @ vec ** 3 < 0.0:
        vec = -vec
    return float(vec[0]), float(vec[1]), float(vec[2])


def _pair_products(W: np.ndarray, Qa: np.ndarray, Qb: np.ndarray):
    prod = np.einsum('aij,jk,blk,lm,cmn->abcin', W, Qa, W, Qb, W)
    tr = np.einsum('aij,jk,blk,li->ab', W, Qa, W, Qb)
    return prod, tr


def trace_coefficient_matrix(basis: NullBasis) -> MatrixPolynomial:
    """10x10 coefficient matrix C(tau) of the cubic system in (alpha, beta, gamma).

    Row 0 holds det(F) = 0 (tau-free); rows 1-9 hold the nine entries of the
    trace constraint, row-major, each cell a polynomial of degree at most two
    in tau.  Columns follow the fixed monomial order.

    The expansion runs over the 27 ordered triples (B_a Q B_b^T Q' B_c) of
    basis matrices; because Q0 = diag(1,1,0) and Q1 = diag(0,0,1) are
    complementary projections, every product collapses to small slices of the
    basis stack instead of full matrix chains.
    """
    W = np.stack([basis.a.reshape(3, 3), basis.b.reshape(3, 3), basis.c.reshape(3, 3)])

    # det(F) by multilinearity over columns: 27 mixed determinants.
    cols = np.empty((27, 3, 3))
    cols[:, :, 0] = W[_I_IDX][:, :, 0]
    cols[:, :, 1] = W[_J_IDX][:, :, 1]
    cols[:, :, 2] = W[_K_IDX][:, :, 2]
    det_coeffs = _TRIPLE_FOLD @ np.linalg.det(cols)

    P = W[:, :, :2]        # first two columns of each basis matrix
    v = W[:, :, 2]         # third columns
    top = W[:, :2, :]      # first two rows
    bot = W[:, 2, :]       # third rows

    # M0[a,b] = B_a Q0 B_b^T = P_a P_b^T; B_a Q1 B_b^T = outer(v_a, v_b).
    M0 = np.tensordot(P, P, axes=([2], [2])).transpose(0, 2, 1, 3)
    # X Q0 B_c keeps columns 1-2 of X against the top rows of B_c,
    # X Q1 B_c is the outer product of X's third column with B_c's third row.
    z = np.tensordot(v[:, :2], top, axes=([1], [1]))        # (b, c, j)

    prod0 = np.tensordot(M0[:, :, :, :2], top, axes=([3], [1]))
    prod0 = prod0.transpose(0, 1, 3, 2, 4)                   # (a,b,c,i,j)
    tr0 = np.tensordot(W[:, :2, :2], W[:, :2, :2], axes=([1, 2], [1, 2]))

    prod1 = (M0[:, :, None, :, 2, None] * bot[None, None, :, None, :]
             + v[:, None, None, :, None] * z[None, :, :, None, :])
    tr1 = M0[:, :, 2, 2] + v[:, :2] @ v[:, :2].T

    prod2 = (v[:, None, None, :, None] * v[None, :, None, 2, None, None]
             * bot[None, None, :, None, :])
    tr2 = np.outer(v[:, 2], v[:, 2])

    slabs = np.empty((3, 10, 10))
    slabs[:, 0, :] = 0.0
    slabs[0, 0, :] = det_coeffs
    for degree, (prod, tr) in enumerate(((prod0, tr0), (prod1, tr1), (prod2, tr2))):
        tl = 2.0 * prod - tr[:, :, None, None, None] * W[None, None, :, :, :]
        slabs[degree, 1:, :] = (_TRIPLE_FOLD @ tl.reshape(27, 9)).T
    return MatrixPolynomial(slabs)


def _sample_radius(ac1: AffineCorrespondence, ac2: AffineCorrespondence) -> float:
    """Interpolation radius 1 / (median coordinate scale)**2.

    Puts the expected tau = f**-2 magnitude inside the sample interval for
    image coordinates measured in pixels.
    """
    coords = sorted(abs(c) for c in (
        ac1.points.u1, ac1.points.v1, ac1.points.u2, ac1.points.v2,
        ac2.points.u1, ac2.points.v1, ac2.points.u2, ac2.points.v2,
    ))
    med = 0.5 * (coords[3] + coords[4])
    if med <= 1e-9:
        return 1.0
    return 1.0 / med ** 2


def _polish_roots(M: MatrixPolynomial, taus: np.ndarray) -> np.ndarray:
    """Newton-refine resultant roots against the exact determinant.

    Interpolated coefficients carry ~1e-12 relative noise which near-double
    roots amplify dramatically; a few Newton steps on det(C(tau)) evaluated
    directly restore full accuracy.  Steps are clamped to 20% of tau, updates
    that would leave the positive axis are rejected, and all roots advance in
    one batched determinant evaluation per iteration.
    """
    taus = np.asarray(taus, dtype=float).copy()
    n = len(taus)
    for _ in range(3):
        h = taus * 1e-7
        d = np.linalg.det(M.evaluate_many(
            np.concatenate([taus, taus + h, taus - h])))
        d0, dp, dm = d[:n], d[n:2 * n], d[2 * n:]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = d0 * (2.0 * h) / (dp - dm)
        step[~np.isfinite(step)] = 0.0
        step = np.clip(step, -0.2 * taus, 0.2 * taus)
        updated = taus - step
        taus = np.where(updated > 0.0, updated, taus)
        if np.all(np.abs(step) <= 1e-12 * taus):
            break
    return taus


def _refine_in_subspace(B: np.ndarray, coeffs: tuple) -> tuple:
    """Alternate between a near-null subspace and the cubic monomial variety.

    B holds orthonormal rows spanning the trailing singular subspace of
    C(tau).  Projecting the monomials of the current coefficients into the
    subspace and re-reading the rank-1 factor of the 3x6 flattening (against
    the current quadratic monomials) are both closed-form matrix-vector
    products, so each sweep is cheap; convergence is typically 2-3 sweeps.
    """
    vec = np.array(coeffs)
    y = None
    for _ in range(5):
        proj = B.T @ (B @ cubic_monomials(*vec))
        norm = np.linalg.norm(proj)
        if norm == 0.0:
            break
        y = proj / norm
        a, b, c = vec
        quad = np.array([a * a, a * b, a * c, b * b, b * c, c * c])
        updated = y[_FLATTEN_ROWS] @ quad
        norm = np.linalg.norm(updated)
        if norm == 0.0:
            break
        updated /= norm
        if updated @ vec < 0.0:
            updated = -updated
        delta = np.linalg.norm(updated - vec)
        vec = updated
        if delta <= 1e-14:
            break
    return y, (float(vec[0]), float(vec[1]), float(vec[2]))


def _monomial_inconsistency(y: np.ndarray, coeffs: tuple) -> float:
    """Relative distance between a null vector and its rank-1 monomial fit."""
    alpha, beta, gamma = coeffs
    rebuilt = np.array([alpha ** ea * beta ** eb * gamma ** ec
                        for ea, eb, ec in _MONOMIAL_EXPONENTS])
    rebuilt = rebuilt / np.linalg.norm(rebuilt)
    y = y / np.linalg.norm(y)
    return float(min(np.linalg.norm(rebuilt - y), np.linalg.norm(rebuilt + y)))


def solve_two_ac(ac1: AffineCorrespondence,
                 ac2: AffineCorrespondence) -> list:
    """All focal-length/fundamental-matrix candidates of a two-correspondence
    minimal sample.

    Returns at most 15 candidates sorted by ascending trace-constraint
    residual.  Raises DegenerateConfiguration for an under-constraining pair
    and NoRealRoot when no positive real root reconstructs.  Roots whose null
    vector has lost the cubic monomial structure (inconsistency above 1e-6)
    are spurious artifacts of an ill-conditioned sample and are dropped.
    """
    basis = null_basis(build_system(ac1, ac2))
    M = trace_coefficient_matrix(basis)
    poly = det_poly(M, radius=_sample_radius(ac1, ac2),
                    max_degree=_MAX_RESULTANT_DEGREE)
    roots = real_positive_roots(poly)
    if not roots:
        raise NoRealRoot("resultant has no positive real root")

    polished = []
    for tau in _polish_roots(M, roots):
        if not any(abs(tau - kept) <= 1e-9 * max(tau, kept) for kept in polished):
            polished.append(tau)

    taus = np.array(polished)
    mats = M.evaluate_many(taus)
    # Entries of C(tau) mix O(1) determinant terms with O(tau**2) trace
    # terms, so rows are equilibrated before the SVD (null space is
    # unchanged); otherwise the null vector absorbs ~1e-5 of junk.
    norms = np.linalg.norm(mats, axis=2)
    norms[norms == 0.0] = 1.0
    _, sv, Vt = np.linalg.svd(mats / norms[:, :, None])
    ys = Vt[:, 9, :]
    # Batched rank-1 extraction over all roots at once.
    U, fs, _ = np.linalg.svd(ys[:, _FLATTEN_ROWS])
    vecs = U[:, :, 0]
    vecs[np.einsum("ri,ri->r", ys[:, (0, 6, 9)], vecs ** 3) < 0.0] *= -1.0
    # The numerical null space is often 2-dimensional even at a clean root;
    # alternating projection between the trailing subspace and the cubic
    # monomial variety pins down the structured vector inside it.
    trailing = np.minimum(3, np.sum(sv <= 1e-6 * sv[:, :1], axis=1))

    stack = basis.stack
    candidates = []
    for r, tau in enumerate(polished):
        if fs[r, 0] == 0.0 or not np.all(np.isfinite(vecs[r])):
            continue
        y = ys[r]
        coeffs = (float(vecs[r, 0]), float(vecs[r, 1]), float(vecs[r, 2]))
        if trailing[r] >= 2:
            refined, coeffs = _refine_in_subspace(Vt[r, 10 - trailing[r]:, :], coeffs)
            if refined is not None:
                y = refined
        if _monomial_inconsistency(y, coeffs) > 1e-6:
            continue
        F = normalize_fundamental(
            (stack @ np.array(coeffs)).reshape(3, 3))
        candidates.append(CandidateSolution(
            focal=float(tau ** -0.5),
            tau=float(tau),
            fundamental=F,
            coefficients=coeffs,
            trace_residual_norm=float(np.linalg.norm(trace_residual(F, tau))),
        ))
    if not candidates:
        raise NoRealRoot("no root yields a usable null vector")
    candidates.sort(key=lambda cand: cand.trace_residual_norm)
    return candidates
