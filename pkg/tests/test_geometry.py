"""Epipolar primitives checked against hand oracles and exact scene truth."""

import numpy as np
import pytest

import acfocal as af
from acfocal.errors import AllCheiralityFail, DegenerateRay
from acfocal.geometry import (
    AffineCorrespondence,
    LocalAffinity,
    PointPair,
    RelativePose,
    decompose_essential,
    epipolar_residual,
    estimate_normal,
    f_to_e,
    fundamental_from_pose,
    intrinsic_matrix,
    normalize_fundamental,
    sampson_distance,
    skew,
    trace_residual,
    triangulate,
)


def test_point_pair_homogeneous():
    pp = PointPair(1.0, 2.0, 3.0, 4.0)
    assert np.array_equal(pp.p1, [1.0, 2.0, 1.0])
    assert np.array_equal(pp.p2, [3.0, 4.0, 1.0])


def test_point_pair_rejects_non_finite():
    with pytest.raises(ValueError):
        PointPair(np.nan, 0.0, 0.0, 0.0)


def test_local_affinity_matrix_and_validation():
    A = LocalAffinity(1.0, 2.0, 3.0, 4.0)
    assert np.array_equal(A.matrix, [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        LocalAffinity(1.0, 2.0, 2.0, 4.0)  # singular
    with pytest.raises(ValueError):
        LocalAffinity(np.inf, 0.0, 0.0, 1.0)


def test_skew_matches_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert np.allclose(skew(a) @ b, np.cross(a, b))


def test_intrinsic_matrix_form():
    K = intrinsic_matrix(600.0)
    assert np.array_equal(K, np.diag([600.0, 600.0, 1.0]))


def test_normalize_fundamental_unit_norm_and_sign():
    rng = np.random.default_rng(1)
    for _ in range(10):
        F = rng.normal(size=(3, 3))
        N = normalize_fundamental(F)
        assert np.isclose(np.linalg.norm(N), 1.0)
        assert N.flat[np.argmax(np.abs(N))] > 0
        # idempotent up to sign choice
        assert np.allclose(normalize_fundamental(N), N)


def test_camera2_center():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3))
    Q, _ = np.linalg.qr(A)
    t = rng.normal(size=3)
    pose = RelativePose(Q, t)
    assert np.allclose(pose.camera2_center, -Q.T @ t)


def test_relative_pose_shape_validation():
    with pytest.raises(ValueError):
        RelativePose(np.eye(2), np.zeros(3))


def test_fundamental_from_pose_annihilates_projections(clean_scene):
    F = fundamental_from_pose(clean_scene.pose, clean_scene.focal)
    for ac in clean_scene.clean:
        assert abs(epipolar_residual(F, ac.points)) < 1e-9 * np.linalg.norm(F)


def test_epipolar_residual_direct():
    F = np.arange(9, dtype=float).reshape(3, 3)
    pp = PointPair(1.0, 2.0, 3.0, -1.0)
    assert np.isclose(epipolar_residual(F, pp), pp.p2 @ F @ pp.p1)


def test_sampson_distance_hand_case():
    # F = [e]_x for a pure x-translation: epipolar lines are horizontal,
    # so a vertical offset d sits at distance d / sqrt(2) in Sampson form
    F = skew([1.0, 0.0, 0.0])
    pp = PointPair(0.0, 0.0, 0.0, 2.0)
    assert np.isclose(sampson_distance(F, pp), 2.0 / np.sqrt(2.0))
    # zero matrix has empty gradient: infinite distance
    assert sampson_distance(np.zeros((3, 3)), pp) == np.inf


def test_f_to_e_scaling_and_singular_values(clean_scene):
    f = clean_scene.focal
    F = normalize_fundamental(clean_scene.fundamental)
    E = f_to_e(F, f)
    K = intrinsic_matrix(f)
    assert np.allclose(E, normalize_fundamental(K.T @ F @ K))
    s = np.linalg.svd(E, compute_uv=False)
    assert s[2] < 1e-9
    assert abs(s[0] - s[1]) < 1e-9


def test_trace_residual_zero_at_truth(clean_scene):
    F = normalize_fundamental(clean_scene.fundamental)
    tau = 1.0 / clean_scene.focal ** 2
    # the conjugation scales entries by 1/tau^2 ~ 1e11, so truth sits at
    # rounding noise well below any wrong-tau residual
    assert np.linalg.norm(trace_residual(F, tau)) < 1e-7
    assert np.linalg.norm(trace_residual(F, 4.0 * tau)) > 1e-4


def test_trace_residual_matches_essential_form(clean_scene):
    # with Q = diag(1,1,tau)/tau the residual conjugates to the essential
    # matrix identity: 2 E E^T E - tr(E E^T) E = K R K for K = diag(f, f, 1)
    f = clean_scene.focal
    rng = np.random.default_rng(4)
    F = rng.normal(size=(3, 3))
    K = intrinsic_matrix(f)
    E = K.T @ F @ K
    oracle = 2.0 * E @ E.T @ E - np.trace(E @ E.T) * E
    R = trace_residual(F, 1.0 / f ** 2)
    assert np.allclose(K @ R @ K, oracle, rtol=1e-9, atol=1e-6 * np.abs(oracle).max())


def test_triangulate_recovers_scene_points(clean_scene):
    for c in clean_scene.correspondences:
        q = triangulate(clean_scene.pose, clean_scene.focal, c.clean.points)
        # pose translation is unit length; scene points live in baseline units
        assert np.allclose(q * clean_scene.baseline, c.point, rtol=1e-8, atol=1e-10)


def test_triangulate_parallel_rays_degenerate():
    pose = RelativePose(np.eye(3), np.array([0.0, 0.0, -1.0]))
    with pytest.raises(DegenerateRay):
        triangulate(pose, 600.0, PointPair(0.0, 0.0, 0.0, 0.0))


def test_decompose_essential_recovers_pose(clean_scene):
    E = f_to_e(normalize_fundamental(clean_scene.fundamental), clean_scene.focal)
    pps = [c.clean.points for c in clean_scene.correspondences[:2]]
    pose = decompose_essential(E, pps, clean_scene.focal)
    assert np.allclose(pose.rotation, clean_scene.pose.rotation, atol=1e-9)
    assert np.allclose(pose.translation, clean_scene.pose.translation, atol=1e-9)


def test_decompose_essential_all_behind_raises():
    # random essential matrices against unrelated random points eventually
    # leave every one of the four pose hypotheses without a front point
    rng = np.random.default_rng(0)
    raised = 0
    for _ in range(100):
        A = rng.normal(size=(3, 3))
        Q, _ = np.linalg.qr(A)
        if np.linalg.det(Q) < 0:
            Q[:, 0] *= -1
        t = rng.normal(size=3)
        t /= np.linalg.norm(t)
        E = normalize_fundamental(skew(t) @ Q)
        pps = [PointPair(*rng.uniform(-600, 600, size=4)) for _ in range(2)]
        try:
            decompose_essential(E, pps, 600.0)
        except AllCheiralityFail:
            raised += 1
    assert raised >= 1


def test_estimate_normal_matches_plane_normal(clean_scene):
    for c in clean_scene.correspondences:
        q = triangulate(clean_scene.pose, clean_scene.focal, c.clean.points)
        n = estimate_normal(clean_scene.pose, clean_scene.focal, c.clean, q)
        assert np.isclose(np.linalg.norm(n), 1.0)
        assert np.allclose(n, c.normal, atol=1e-6)


def test_affinity_maps_epipolar_normals(clean_scene):
    # the local affinity carries the image-2 epipolar line normal to the
    # (negated) image-1 normal: A^-T (F^T p2)_{1:2} = -(F p1)_{1:2}
    F = normalize_fundamental(clean_scene.fundamental)
    for c in clean_scene.correspondences:
        pp, A = c.clean.points, c.clean.affinity.matrix
        lhs = np.linalg.inv(A).T @ (F.T @ pp.p2)[:2]
        rhs = -(F @ pp.p1)[:2]
        assert np.allclose(lhs, rhs, atol=1e-10)
