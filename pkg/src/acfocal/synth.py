"""Synthetic two-view scenes with ground-truth affine correspondences.

Camera 1 sits at a configurable position (default [0, 0, 1]) looking at the
origin; camera 2 is displaced by a fixed baseline in a random direction and
also looks at the origin.  Scene points are sampled on random planes through
the origin and kept only when they are visible in both views: inside the
image domain, in front of both cameras, and on the front side of their patch
as seen from both centers (a detected feature is never seen from behind).

All ground-truth fields live in the camera-1 frame in world units; the stored
relative pose carries a unit-norm translation, so triangulated coordinates
come out divided by the baseline length.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import FieldOfViewExhausted, PlaneThroughCenter
from .geometry import (
    AffineCorrespondence,
    LocalAffinity,
    PointPair,
    RelativePose,
    intrinsic_matrix,
    normalize_fundamental,
    skew,
)

_MAX_POINT_ATTEMPTS = 1000
_MAX_PLANE_REDRAWS = 50
# Minimum cosine margin against edge-on patches so visibility is unambiguous.
_FACING_MARGIN = 1e-3


@dataclass(frozen=True)
class SceneConfig:
    """Parameters of the synthetic protocol.

    Noise and the aspect perturbation touch only the measured correspondences;
    ground truth always stays exact.  ``affinity_noise_mode`` is either
    ``"recompute"`` (affinities re-derived from the true plane homography at
    the noisy points) or ``"additive"`` (Gaussian entry noise of scale
    ``sigma * affinity_noise_scale`` on the clean affinity).  The image
    half-extents only bound the uniform draws that replace outlier entries;
    inlier projections are not clipped to a raster.
    """

    focal: float = 600.0
    baseline: float = 0.15
    plane_count: int = 5
    samples_per_plane: int = 50
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    aspect_ratio: float = 1.0
    seed: int = 0
    camera1_position: tuple = (0.0, 0.0, 1.0)
    image_half_width: float = 600.0
    image_half_height: float = 400.0
    patch_halfwidth: float = 2.0
    affinity_noise_mode: str = "recompute"
    affinity_noise_scale: float = 0.01
    require_front_facing: bool = True

    def __post_init__(self):
        if not (self.focal > 0 and self.baseline > 0):
            raise ValueError("focal and baseline must be positive")
        if self.plane_count < 1 or self.samples_per_plane < 1:
            raise ValueError("need at least one plane and one sample per plane")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier fraction must lie in [0, 1)")
        if self.affinity_noise_mode not in ("recompute", "additive"):
            raise ValueError("unknown affinity noise mode")


@dataclass(frozen=True, eq=False)
class Plane:
    """Oriented plane normal . X = distance in the camera-1 frame.

    The distance is expressed in the same units as the pose translation, so a
    unit-baseline pose pairs with baseline-normalized distances.
    """

    normal: np.ndarray
    distance: float


@dataclass(frozen=True, eq=False)
class SyntheticCorrespondence:
    """One generated correspondence with its ground truth.

    ``measured`` carries noise/aspect/outlier effects; ``clean`` is the exact
    projection.  ``point`` and ``normal`` are in the camera-1 frame, world
    units, with the normal facing camera 1.
    """

    measured: AffineCorrespondence
    clean: AffineCorrespondence
    point: np.ndarray
    normal: np.ndarray
    plane_index: int
    is_outlier: bool


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    config: SceneConfig
    focal: float
    baseline: float
    pose: RelativePose
    fundamental: np.ndarray
    essential: np.ndarray
    planes: tuple
    correspondences: tuple

    @property
    def measured(self) -> list:
        return [c.measured for c in self.correspondences]

    @property
    def clean(self) -> list:
        return [c.clean for c in self.correspondences]


def _look_at(center: np.ndarray, target: np.ndarray, up: np.ndarray) -> np.ndarray:
    """World-to-camera rotation for a camera at center looking at target."""
    z = target - center
    z = z / np.linalg.norm(z)
    x = np.cross(up, z)
    nx = np.linalg.norm(x)
    if nx < 1e-9:
        # up parallel to view direction; pick any transverse axis
        alt = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        x = np.cross(alt, z)
        nx = np.linalg.norm(x)
    x = x / nx
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def _project(focal: float, q: np.ndarray) -> np.ndarray:
    return np.array([focal * q[0] / q[2], focal * q[1] / q[2]])


def affinity_from_plane(pose: RelativePose, focal: float, plane: Plane,
                        p1: np.ndarray) -> LocalAffinity:
    """Exact local affinity induced at p1 by a plane-induced homography.

    The homography is H = K (d R + t n^T) K^-1 and the affinity is the 2x2
    Jacobian of its dehomogenized transfer evaluated at p1 = (u1, v1).
    Raises PlaneThroughCenter when the plane contains either camera center.
    """
    n = np.asarray(plane.normal, dtype=float)
    d = float(plane.distance)
    R = pose.rotation
    t = pose.translation
    if abs(d) <= 1e-10:
        raise PlaneThroughCenter("plane passes through camera 1")
    if abs(n @ pose.camera2_center - d) <= 1e-10:
        raise PlaneThroughCenter("plane passes through camera 2")

    K = intrinsic_matrix(focal)
    k_inv = np.diag([1.0 / focal, 1.0 / focal, 1.0])
    H = K @ (d * R + np.outer(t, n)) @ k_inv

    p1h = np.array([p1[0], p1[1], 1.0])
    w = H[2] @ p1h
    if abs(w) <= 1e-12 * np.linalg.norm(H) * np.linalg.norm(p1h):
        raise PlaneThroughCenter("homography sends the point to infinity")
    p2 = (H[:2] @ p1h) / w
    J = (H[:2, :2] - np.outer(p2, H[2, :2])) / w
    return LocalAffinity(J[0, 0], J[0, 1], J[1, 0], J[1, 1])


def _visible(cfg: SceneConfig, focal, q1, q2) -> bool:
    # Common field of view means in front of both cameras; the protocol does
    # not clip against an image raster (points may project arbitrarily far
    # off-axis, which is what makes the focal length well observable).
    return q1[2] > 1e-3 and q2[2] > 1e-3


def _front_facing(normal, center, q, margin=_FACING_MARGIN) -> bool:
    d = center - q
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return False
    return normal @ d / nd > margin


def generate(config: SceneConfig) -> SyntheticScene:
    """Build a deterministic synthetic scene for the given configuration.

    Raises FieldOfViewExhausted when 1000 consecutive rejection-sampling
    attempts fail for a plane even after redrawing the plane.
    """
    rng = np.random.default_rng(config.seed)
    focal = config.focal

    c1w = np.asarray(config.camera1_position, dtype=float)
    c2w = c1w + config.baseline * _random_unit(rng)
    origin = np.zeros(3)
    R1w = _look_at(c1w, origin, np.array([0.0, 1.0, 0.0]))
    R2w = _look_at(c2w, origin, _random_unit(rng))

    R = R2w @ R1w.T
    t_world = R2w @ (c1w - c2w)
    baseline = float(np.linalg.norm(t_world))
    pose = RelativePose(R, t_world / baseline)
    E = normalize_fundamental(skew(pose.translation) @ R)
    k_inv = np.diag([1.0 / focal, 1.0 / focal, 1.0])
    F = normalize_fundamental(k_inv @ skew(pose.translation) @ R @ k_inv)

    c2_cam1 = R1w @ (c2w - c1w)  # camera-2 center in the camera-1 frame

    planes = []
    raw = []
    for plane_index in range(config.plane_count):
        for _ in range(_MAX_PLANE_REDRAWS):
            n_world = _random_unit(rng)
            b1 = _random_unit(rng)
            b1 = b1 - (b1 @ n_world) * n_world
            if np.linalg.norm(b1) < 1e-6:
                continue
            b1 = b1 / np.linalg.norm(b1)
            b2 = np.cross(n_world, b1)

            n_cam1 = R1w @ n_world
            d_cam1 = n_cam1 @ (R1w @ (origin - c1w))
            samples = []
            attempts = 0
            while len(samples) < config.samples_per_plane:
                if attempts >= _MAX_POINT_ATTEMPTS:
                    break
                attempts += 1
                s, u = rng.uniform(-config.patch_halfwidth, config.patch_halfwidth, size=2)
                Xw = s * b1 + u * b2
                q1 = R1w @ (Xw - c1w)
                q2 = R2w @ (Xw - c2w)
                if not _visible(config, focal, q1, q2):
                    continue
                normal = n_cam1 if n_cam1 @ (0.0 - q1) > 0 else -n_cam1
                if config.require_front_facing:
                    if not (_front_facing(normal, np.zeros(3), q1)
                            and _front_facing(normal, c2_cam1, q1)):
                        continue
                attempts = 0
                samples.append((q1, normal))
            if len(samples) == config.samples_per_plane:
                plane = Plane(n_cam1, d_cam1 / baseline)
                planes.append(plane)
                for q1, normal in samples:
                    raw.append((plane_index, plane, q1, normal))
                break
        else:
            raise FieldOfViewExhausted(
                f"could not populate plane {plane_index} after "
                f"{_MAX_PLANE_REDRAWS} redraws")

    correspondences = []
    for plane_index, plane, q1, normal in raw:
        u1 = _project(focal, q1)
        q2 = R @ q1 + t_world
        u2 = _project(focal, q2)
        pp = PointPair(u1[0], u1[1], u2[0], u2[1])
        aff = affinity_from_plane(pose, focal, plane, u1)
        clean = AffineCorrespondence(pp, aff)
        correspondences.append(SyntheticCorrespondence(
            measured=clean, clean=clean, point=q1, normal=normal,
            plane_index=plane_index, is_outlier=False))

    scene = SyntheticScene(
        config=config, focal=focal, baseline=baseline, pose=pose,
        fundamental=F, essential=E, planes=tuple(planes),
        correspondences=tuple(correspondences))

    scene = add_noise(scene, config.noise_sigma, config.seed + 1)
    scene = _inject_outliers(scene, rng)
    return scene


def _measure(scene: SyntheticScene, corr: SyntheticCorrespondence, sigma: float,
             rng: np.random.Generator) -> AffineCorrespondence:
    """Measured correspondence: aspect perturbation first, then noise."""
    cfg = scene.config
    pp = corr.clean.points
    v2 = pp.v2 * cfg.aspect_ratio
    du = rng.normal(scale=sigma, size=4) if sigma > 0 else np.zeros(4)
    noisy = PointPair(pp.u1 + du[0], pp.v1 + du[1], pp.u2 + du[2], v2 + du[3])

    if sigma > 0 and cfg.affinity_noise_mode == "recompute":
        plane = scene.planes[corr.plane_index]
        aff = affinity_from_plane(scene.pose, scene.focal, plane,
                                  np.array([noisy.u1, noisy.v1]))
        A = aff.matrix
    else:
        A = corr.clean.affinity.matrix.copy()
        if sigma > 0:
            A = A + rng.normal(scale=sigma * cfg.affinity_noise_scale, size=(2, 2))
    A = np.diag([1.0, cfg.aspect_ratio]) @ A
    affinity = LocalAffinity(A[0, 0], A[0, 1], A[1, 0], A[1, 1])
    return AffineCorrespondence(noisy, affinity)


def add_noise(scene: SyntheticScene, sigma: float, seed: int) -> SyntheticScene:
    """Re-derive measured correspondences from ground truth at noise level sigma.

    Point coordinates receive i.i.d. Gaussian noise in all four components;
    affinities follow the configured noise mode.  Outlier entries are left as
    they are, and all ground-truth fields are untouched.
    """
    if sigma < 0:
        raise ValueError("noise sigma must be non-negative")
    if sigma == 0 and scene.config.aspect_ratio == 1.0:
        if all(c.measured is c.clean or c.is_outlier for c in scene.correspondences):
            return scene
    rng = np.random.default_rng(seed)
    updated = []
    for corr in scene.correspondences:
        if corr.is_outlier:
            updated.append(corr)
            continue
        updated.append(replace(corr, measured=_measure(scene, corr, sigma, rng)))
    return replace(scene, correspondences=tuple(updated))


def _inject_outliers(scene: SyntheticScene, rng: np.random.Generator) -> SyntheticScene:
    cfg = scene.config
    n = len(scene.correspondences)
    count = int(round(cfg.outlier_fraction * n))
    if count == 0:
        return scene
    chosen = set(rng.choice(n, size=count, replace=False).tolist())
    updated = []
    for idx, corr in enumerate(scene.correspondences):
        if idx not in chosen:
            updated.append(corr)
            continue
        u = rng.uniform(-cfg.image_half_width, cfg.image_half_width, size=2)
        v = rng.uniform(-cfg.image_half_height, cfg.image_half_height, size=2)
        while True:
            a = rng.uniform(-2.0, 2.0, size=4)
            if abs(a[0] * a[3] - a[1] * a[2]) > 1e-3:
                break
        measured = AffineCorrespondence(
            PointPair(u[0], v[0], u[1], v[1]),
            LocalAffinity(a[0], a[1], a[2], a[3]))
        updated.append(replace(corr, measured=measured, is_outlier=True))
    return replace(scene, correspondences=tuple(updated))
