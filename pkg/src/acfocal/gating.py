"""Root elimination: physical focal limits and surface observability.

A spurious focal-length root implies a distorted pose; triangulating the
minimal sample under that pose and recovering each patch normal from its
local affinity exposes the distortion, since a real surface point can never
be observed from behind.  The normal, oriented toward camera 1, must also
face camera 2: n . (c_i - q) > 0 for both centers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AllCheiralityFail
from .geometry import decompose_essential, estimate_normal, f_to_e, triangulate
from .solver import CandidateSolution


@dataclass(frozen=True)
class FocalLimits:
    """Coarse physical bounds on a plausible focal length, in pixels."""

    min_focal: float = 100.0
    max_focal: float = 500000.0

    def __post_init__(self):
        if not (0 < self.min_focal < self.max_focal):
            raise ValueError("limits must satisfy 0 < min < max")


@dataclass(frozen=True, eq=False)
class ObservabilityCheck:
    """Per-correspondence record of the front-facing test."""

    point: np.ndarray
    normal: np.ndarray
    dot_camera1: float
    dot_camera2: float
    passed: bool


@dataclass(frozen=True)
class ObservabilityReport:
    checks: tuple = ()
    failure: str | None = None


def gate_physical(candidates, limits: FocalLimits = FocalLimits()) -> list:
    """Keep candidates whose focal length lies inside the physical limits.

    Order-preserving and idempotent; survivors carry physical=True.
    """
    kept = []
    for cand in candidates:
        if limits.min_focal <= cand.focal <= limits.max_focal:
            kept.append(replace(
                cand, gate_flags=replace(cand.gate_flags, physical=True)))
    return kept


def gate_observability(candidate: CandidateSolution, correspondences):
    """Front-facing test of a candidate against its minimal sample.

    Decomposes the candidate's implied essential matrix, triangulates each
    correspondence, estimates its patch normal from the affinity, and demands
    n . (c_i - q) > 0 for both camera centers.  A decomposition with no
    cheirality-consistent pose fails the gate (reported, not raised);
    triangulation and normal-estimation errors propagate.  An empty
    correspondence list passes vacuously.
    """
    correspondences = list(correspondences)
    if not correspondences:
        return True, ObservabilityReport()

    E = f_to_e(candidate.fundamental, candidate.focal)
    try:
        pose = decompose_essential(
            E, [ac.points for ac in correspondences], candidate.focal)
    except AllCheiralityFail:
        return False, ObservabilityReport(failure="cheirality")

    c1 = np.zeros(3)
    c2 = pose.camera2_center
    checks = []
    all_passed = True
    for ac in correspondences:
        q = triangulate(pose, candidate.focal, ac.points)
        n = estimate_normal(pose, candidate.focal, ac, q)
        d1 = float(n @ (c1 - q))
        d2 = float(n @ (c2 - q))
        passed = d1 > 0 and d2 > 0
        all_passed = all_passed and passed
        checks.append(ObservabilityCheck(q, n, d1, d2, passed))
    return all_passed, ObservabilityReport(checks=tuple(checks))


def half_sphere_contains(center_direction, v) -> bool:
    """Half-sphere membership evaluated in spherical coordinates.

    Cross-check form of the dot-product test: converts both directions to
    (azimuth, elevation) and applies the spherical law of cosines; membership
    means the great-circle distance to the half-sphere center is below 90
    degrees.
    """
    def angles(w):
        w = np.asarray(w, dtype=float)
        r = np.linalg.norm(w)
        return np.arctan2(w[1], w[0]), np.arcsin(np.clip(w[2] / r, -1.0, 1.0))

    theta1, sig1 = angles(center_direction)
    theta2, sig2 = angles(v)
    cos_dist = (np.sin(sig1) * np.sin(sig2)
                + np.cos(sig1) * np.cos(sig2) * np.cos(theta1 - theta2))
    return cos_dist > 0
