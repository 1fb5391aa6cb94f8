"""Two-view epipolar geometry on principal-point-centered pixel coordinates.

The camera pair shares the intrinsic matrix K = diag(f, f, 1), so a single
scalar focal length stands in for the intrinsics throughout.  The reference
frame is camera 1; camera 2 sees X_2 = R X_1 + t with a unit-norm baseline t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllCheiralityFail, DegenerateRay, NormalEstimationFailed

# 90-degree rotation about z used by the essential-matrix decomposition.
_W = np.array([
    [0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
])


@dataclass(frozen=True)
class PointPair:
    """A corresponding image point, centered pixel coordinates in both views."""

    u1: float
    v1: float
    u2: float
    v2: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.u1, self.v1, self.u2, self.v2])):
            raise ValueError("point coordinates must be finite")

    @property
    def p1(self) -> np.ndarray:
        """Homogeneous point in image 1."""
        return np.array([self.u1, self.v1, 1.0])

    @property
    def p2(self) -> np.ndarray:
        """Homogeneous point in image 2."""
        return np.array([self.u2, self.v2, 1.0])


@dataclass(frozen=True)
class LocalAffinity:
    """2x2 linearization of the image-1 -> image-2 mapping around a point.

    Row-major entries [[a1, a2], [a3, a4]]; must be invertible.
    """

    a1: float
    a2: float
    a3: float
    a4: float

    def __post_init__(self):
        entries = [self.a1, self.a2, self.a3, self.a4]
        if not np.all(np.isfinite(entries)):
            raise ValueError("affinity entries must be finite")
        if self.a1 * self.a4 - self.a2 * self.a3 == 0.0:
            raise ValueError("affinity must be invertible")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2], [self.a3, self.a4]])


@dataclass(frozen=True)
class AffineCorrespondence:
    """A point pair together with its local affine transformation."""

    points: PointPair
    affinity: LocalAffinity


@dataclass(frozen=True, eq=False)
class RelativePose:
    """Rotation and unit-norm translation taking camera-1 coordinates to camera 2."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        if self.rotation.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("pose needs a 3x3 rotation and length-3 translation")

    @property
    def camera2_center(self) -> np.ndarray:
        """Center of camera 2 in the camera-1 frame."""
        return -self.rotation.T @ self.translation


@dataclass(frozen=True, eq=False)
class ScenePoint:
    """A 3D point with the unit surface normal of the patch it sits on."""

    point: np.ndarray
    normal: np.ndarray


def intrinsic_matrix(focal: float) -> np.ndarray:
    """K = diag(f, f, 1) for a centered principal point and unit aspect ratio."""
    if not (np.isfinite(focal) and focal > 0):
        raise ValueError("focal length must be positive and finite")
    return np.diag([focal, focal, 1.0])


def skew(v) -> np.ndarray:
    """Cross-product matrix of a 3-vector."""
    x, y, z = v
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def normalize_fundamental(F) -> np.ndarray:
    """Scale to unit Frobenius norm and make the largest-magnitude entry positive."""
    F = np.asarray(F, dtype=float)
    norm = np.linalg.norm(F)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite matrix")
    F = F / norm
    if F.flat[np.argmax(np.abs(F))] < 0:
        F = -F
    return F


def fundamental_from_pose(pose: RelativePose, focal: float) -> np.ndarray:
    """Ground-truth fundamental matrix K^-T [t]x R K^-1, normalized."""
    k_inv = np.diag([1.0 / focal, 1.0 / focal, 1.0])
    return normalize_fundamental(k_inv @ skew(pose.translation) @ pose.rotation @ k_inv)


def epipolar_residual(F, pp: PointPair) -> float:
    """Algebraic epipolar residual p2^T F p1."""
    return float(pp.p2 @ np.asarray(F) @ pp.p1)


def sampson_distance(F, pp: PointPair) -> float:
    """First-order geometric distance to the epipolar constraint, in pixels."""
    F = np.asarray(F)
    r = pp.p2 @ F @ pp.p1
    l2 = F @ pp.p1
    l1 = F.T @ pp.p2
    denom = l2[0] ** 2 + l2[1] ** 2 + l1[0] ** 2 + l1[1] ** 2
    if denom == 0.0:
        return np.inf
    return float(abs(r) / np.sqrt(denom))


def f_to_e(F, focal: float) -> np.ndarray:
    """Upgrade a fundamental matrix to an essential matrix, E = K^T F K.

    The result is renormalized to unit Frobenius norm with the
    largest-magnitude entry positive.
    """
    K = intrinsic_matrix(focal)
    return normalize_fundamental(K.T @ np.asarray(F) @ K)


def trace_residual(F, tau: float) -> np.ndarray:
    """Residual 2 F Q F^T Q F - tr(F Q F^T Q) F with Q = diag(1, 1, tau) / tau.

    Vanishes exactly when F is compatible with a shared focal length
    f = tau**-0.5; tau must be positive.  The constraint is homogeneous of
    degree two in Q, so the 1/tau factor does not move the zero set; it puts
    the residual of a unit-norm pixel-scale F on an O(1) footing instead of
    crushing everything by f^-4.
    """
    if not (np.isfinite(tau) and tau > 0):
        raise ValueError("tau must be positive and finite")
    F = np.asarray(F, dtype=float)
    Q = np.diag([1.0 / tau, 1.0 / tau, 1.0])
    FQ = F @ Q
    M = FQ @ F.T @ Q
    return 2.0 * M @ F - np.trace(M) * F


def projection_matrices(pose: RelativePose, focal: float):
    """Finite projection matrices K [I | 0] and K [R | t]."""
    K = intrinsic_matrix(focal)
    P1 = K @ np.hstack([np.eye(3), np.zeros((3, 1))])
    P2 = K @ np.hstack([pose.rotation, pose.translation.reshape(3, 1)])
    return P1, P2


def triangulate(pose: RelativePose, focal: float, pp: PointPair) -> np.ndarray:
    """Linear two-view triangulation of a point pair into the camera-1 frame.

    Raises DegenerateRay when the homogeneous solution is not unique
    (collinear rays, zero baseline) or lands at infinity.
    """
    P1, P2 = projection_matrices(pose, focal)
    A = np.vstack([
        pp.u1 * P1[2] - P1[0],
        pp.v1 * P1[2] - P1[1],
        pp.u2 * P2[2] - P2[0],
        pp.v2 * P2[2] - P2[1],
    ])
    _, s, Vt = np.linalg.svd(A)
    if s[2] - s[3] <= 1e-12 * s[0]:
        raise DegenerateRay("triangulation solution is not unique")
    X = Vt[3]
    if abs(X[3]) <= 1e-12 * np.linalg.norm(X[:3]):
        raise DegenerateRay("triangulated point at infinity")
    return X[:3] / X[3]


def _cheirality_count(R, t, focal, point_pairs) -> int:
    pose = RelativePose(R, t)
    count = 0
    for pp in point_pairs:
        try:
            q = triangulate(pose, focal, pp)
        except DegenerateRay:
            continue
        if q[2] > 0 and (R @ q + t)[2] > 0:
            count += 1
    return count


def decompose_essential(E, point_pairs, focal: float) -> RelativePose:
    """Recover the relative pose from an essential matrix.

    All four (R, t) factorizations are tested; the one placing the most
    triangulated correspondences in front of both cameras wins, with ties
    broken by enumeration order.  Raises AllCheiralityFail when no candidate
    sees any point in front of both cameras.
    """
    U, _, Vt = np.linalg.svd(np.asarray(E, dtype=float))
    if np.linalg.det(U) < 0:
        U = -U
    if np.linalg.det(Vt) < 0:
        Vt = -Vt
    R1 = U @ _W @ Vt
    R2 = U @ _W.T @ Vt
    t = U[:, 2]
    candidates = [(R1, t), (R1, -t), (R2, t), (R2, -t)]
    counts = [_cheirality_count(R, tt, focal, point_pairs) for R, tt in candidates]
    best = int(np.argmax(counts))
    if counts[best] == 0:
        raise AllCheiralityFail("no pose places a correspondence in front of both cameras")
    R, tt = candidates[best]
    return RelativePose(R, tt)


def _consistent_affinity_scale(A: np.ndarray, F: np.ndarray, pp: PointPair) -> np.ndarray:
    """Rescale A so that A^-T (F^T p2)_xy = -(F p1)_xy holds in least squares.

    Local affinities constrained by F have a fixed overall scale; enforcing it
    up front makes the normal estimate invariant to any input rescaling of A.
    """
    n1 = (F.T @ pp.p2)[:2]
    n2 = (F @ pp.p1)[:2]
    w = np.linalg.solve(A.T, n1)
    ww = w @ w
    if ww == 0.0 or not np.isfinite(ww):
        raise NormalEstimationFailed("epipolar lines vanish at the correspondence")
    mu = -(w @ n2) / ww
    if mu == 0.0 or not np.isfinite(mu):
        raise NormalEstimationFailed("affinity scale is inconsistent with the pose")
    return A / mu


def _projection_jacobian(P: np.ndarray, q: np.ndarray) -> np.ndarray:
    """2x3 derivative of the dehomogenized projection q -> P [q; 1]."""
    v = P[:, :3] @ q + P[:, 3]
    w = v[2]
    if abs(w) <= 1e-12 * max(1.0, float(np.abs(v).max())):
        raise NormalEstimationFailed("point projects to infinity")
    return (P[:2, :3] - np.outer(v[:2] / w, P[2, :3])) / w


def estimate_normal(pose: RelativePose, focal: float, ac: AffineCorrespondence,
                    q: np.ndarray) -> np.ndarray:
    """Surface normal of the plane patch inducing the local affinity at ac.

    A tangent displacement dq at q moves the two image points by J1 dq and
    J2 dq, where J_i is the projection Jacobian of camera i at q; chaining
    through the affinity gives (J2 - A J1) dq = 0 on the whole tangent
    plane, so the row space of J2 - A J1 is spanned by the normal.  The
    dominant right singular vector is returned, flipped to face camera 1
    (n . (c1 - q) > 0).
    """
    A = ac.affinity.matrix.astype(float)
    pp = ac.points
    scale = max(1.0, float(np.max(np.abs(A))) ** 2)
    if abs(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]) <= 1e-12 * scale:
        raise NormalEstimationFailed("singular local affinity")

    # The epipolar geometry fixes the overall scale of a compatible affinity;
    # enforcing it first makes the estimate invariant to rescalings of A.
    k_inv = np.diag([1.0 / focal, 1.0 / focal, 1.0])
    F = k_inv @ skew(pose.translation) @ pose.rotation @ k_inv
    A = _consistent_affinity_scale(A, F, pp)

    q = np.asarray(q, dtype=float)
    P1, P2 = projection_matrices(pose, focal)
    M = _projection_jacobian(P2, q) - A @ _projection_jacobian(P1, q)
    _, sv, vt = np.linalg.svd(M)
    j_scale = max(np.abs(P1).max(), np.abs(P2).max()) / max(1.0, float(q[2]))
    if sv[0] <= 1e-12 * j_scale:
        raise NormalEstimationFailed("normal direction is unobservable")
    n = vt[0]
    if n @ q > 0.0:
        n = -n
    return n
