"""End-to-end estimation, iteration budgeting, and file formats.

The estimation loop repeatedly draws minimal samples of two affine
correspondences, solves each, gates the roots, and pools the survivors; the
focal length is then selected by median-shift mode seeking polished with KDE
gradient ascent, with kernel voting reported as the baseline.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    AcfocalError,
    DegenerateRay,
    EmptyPool,
    InsufficientCorrespondences,
    NormalEstimationFailed,
    NoSurvivingRoots,
    ParseError,
)
from .gating import FocalLimits, gate_observability, gate_physical
from .geometry import AffineCorrespondence, LocalAffinity, PointPair
from .selection import (
    CandidatePool,
    PoolEntry,
    SelectionConfig,
    kde_gradient_ascent,
    kde_values,
    kernel_voting,
    median_shift,
)
from .solver import solve_two_ac

_LOGGER = logging.getLogger(__name__)
_MAX_ITERATIONS_SENTINEL = np.iinfo(np.int64).max
_DENSITY_SAMPLES = 512


@dataclass(frozen=True)
class EstimationConfig:
    """Controls for the robust estimation loop.

    ``voting_domain`` is ``"focal_px"`` (default) or ``"relative_percent"``;
    the latter runs selection in 100 * (f - reference) / reference so the
    bandwidth reads as a relative tolerance.  The reference is
    ``reference_focal`` when given (e.g. ground truth during evaluation),
    otherwise the pool median.
    """

    iterations: int = 100
    selection: SelectionConfig = SelectionConfig()
    limits: FocalLimits = FocalLimits()
    principal_point: tuple = (0.0, 0.0)
    seed: int = 0
    voting_domain: str = "focal_px"
    reference_focal: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.voting_domain not in ("focal_px", "relative_percent"):
            raise ValueError("unknown voting domain")
        if self.reference_focal is not None and self.reference_focal <= 0:
            raise ValueError("reference focal must be positive")


@dataclass(frozen=True)
class SampleDiagnostics:
    """Outcome of one minimal-sample iteration."""

    sample_index: int
    correspondence_indices: tuple
    candidates: int
    after_physical: int
    after_observability: int
    error: str | None = None


@dataclass(frozen=True, eq=False)
class EstimationResult:
    focal: float
    fundamental: np.ndarray
    kernel_voting_focal: float
    median_shift_mode: float
    pool: CandidatePool
    density_x: np.ndarray
    density_y: np.ndarray
    diagnostics: tuple
    config: EstimationConfig


def ransac_iterations(sample_size: int, outlier_ratio: float,
                      confidence: float = 0.95) -> int:
    """ceil(log(1 - confidence) / log(1 - (1 - outlier_ratio)**sample_size)).

    Returns 1 when an all-inlier sample is (numerically) certain and the
    int64 maximum when the inlier probability underflows to zero.
    """
    if sample_size < 1:
        raise ValueError("sample size must be at least 1")
    if not 0.0 <= outlier_ratio < 1.0:
        raise ValueError("outlier ratio must lie in [0, 1)")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    w = (1.0 - outlier_ratio) ** sample_size
    if w >= 1.0 - 1e-15:
        return 1
    denom = math.log1p(-w)
    if denom == 0.0:
        return int(_MAX_ITERATIONS_SENTINEL)
    k = math.ceil(math.log(1.0 - confidence) / denom)
    if k >= _MAX_ITERATIONS_SENTINEL:
        return int(_MAX_ITERATIONS_SENTINEL)
    return max(int(k), 1)


def _domain_reference(focals: np.ndarray, config: EstimationConfig) -> float:
    if config.voting_domain == "relative_percent":
        if config.reference_focal is not None:
            return float(config.reference_focal)
        return float(np.median(focals))
    return 1.0


def _to_domain(focals: np.ndarray, reference: float,
               config: EstimationConfig) -> np.ndarray:
    if config.voting_domain == "relative_percent":
        return 100.0 * (focals - reference) / reference
    return focals


def _from_domain(value: float, reference: float,
                 config: EstimationConfig) -> float:
    if config.voting_domain == "relative_percent":
        return reference * (1.0 + value / 100.0)
    return value


def estimate(correspondences, config: EstimationConfig = EstimationConfig()) -> EstimationResult:
    """Robust focal length and fundamental matrix from many minimal samples.

    Each iteration draws two distinct correspondences (uniformly, seeded,
    with replacement across iterations), solves them, and keeps the roots
    that pass both gates.  Samples whose solve or gating fails are recorded
    in the diagnostics and contribute nothing.  Raises
    InsufficientCorrespondences for fewer than two inputs and
    NoSurvivingRoots when the pool ends up empty.
    """
    correspondences = list(correspondences)
    n = len(correspondences)
    if n < 2:
        raise InsufficientCorrespondences(f"got {n} correspondences, need 2")

    rng = np.random.default_rng(config.seed)
    entries = []
    diagnostics = []
    for it in range(config.iterations):
        i, j = (int(k) for k in rng.choice(n, size=2, replace=False))
        sample = [correspondences[i], correspondences[j]]
        try:
            candidates = solve_two_ac(sample[0], sample[1])
        except AcfocalError as exc:
            diagnostics.append(SampleDiagnostics(it, (i, j), 0, 0, 0,
                                                 type(exc).__name__))
            continue
        physical = gate_physical(candidates, config.limits)
        survivors = []
        for cand in physical:
            try:
                ok, _ = gate_observability(cand, sample)
            except (DegenerateRay, NormalEstimationFailed):
                ok = False
            if ok:
                survivors.append(replace(
                    cand, gate_flags=replace(cand.gate_flags, observability=True)))
        for cand in survivors:
            entries.append(PoolEntry(cand.focal, it, cand))
        diagnostics.append(SampleDiagnostics(
            it, (i, j), len(candidates), len(physical), len(survivors)))

    if not entries:
        raise NoSurvivingRoots("no candidate survived the gates")
    pool = CandidatePool(tuple(entries))

    reference = _domain_reference(pool.focals, config)
    domain_values = _to_domain(pool.focals, reference, config)
    mode = median_shift(domain_values, config.selection)
    selected = _from_domain(
        kde_gradient_ascent(mode, domain_values, config.selection),
        reference, config)
    voted = _from_domain(kernel_voting(domain_values, config.selection),
                         reference, config)

    best = min(pool.entries,
               key=lambda e: (abs(e.focal - selected),
                              e.candidate.trace_residual_norm))

    lo, hi = float(domain_values.min()), float(domain_values.max())
    if hi == lo:
        h = config.selection.bandwidth
        lo, hi = lo - h, hi + h
    xs = np.linspace(lo, hi, _DENSITY_SAMPLES)
    ys = kde_values(domain_values, xs, config.selection.bandwidth)

    return EstimationResult(
        focal=float(selected),
        fundamental=best.candidate.fundamental,
        kernel_voting_focal=float(voted),
        median_shift_mode=float(_from_domain(mode, reference, config)),
        pool=pool,
        density_x=xs,
        density_y=ys,
        diagnostics=tuple(diagnostics),
        config=config,
    )


def load_correspondences(path, principal_point=(0.0, 0.0)) -> list:
    """Parse a correspondence text file.

    Each data line holds eight whitespace-separated decimals
    ``u1 v1 u2 v2 a1 a2 a3 a4``; ``#`` starts a comment and blank lines are
    ignored.  The principal point is subtracted from the point coordinates.
    Lines with a singular affinity are skipped with a logged warning count;
    malformed lines raise ParseError with their line number.
    """
    path = Path(path)
    cx, cy = float(principal_point[0]), float(principal_point[1])
    correspondences = []
    skipped = 0
    text = path.read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 8:
            raise ParseError(f"{path}:{lineno}: expected 8 values, got {len(tokens)}")
        try:
            u1, v1, u2, v2, a1, a2, a3, a4 = (float(t) for t in tokens)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if not all(map(math.isfinite, (u1, v1, u2, v2, a1, a2, a3, a4))):
            raise ParseError(f"{path}:{lineno}: non-finite value")
        scale = max(1.0, max(abs(a1), abs(a2), abs(a3), abs(a4)) ** 2)
        if abs(a1 * a4 - a2 * a3) <= 1e-12 * scale:
            skipped += 1
            continue
        correspondences.append(AffineCorrespondence(
            PointPair(u1 - cx, v1 - cy, u2 - cx, v2 - cy),
            LocalAffinity(a1, a2, a3, a4)))
    if skipped:
        _LOGGER.warning("%s: skipped %d singular-affinity line(s)", path, skipped)
    return correspondences


def save_correspondences(correspondences, path) -> None:
    """Write correspondences in the text format read by load_correspondences.

    Values are printed with 17 significant digits so a round trip is
    bit-exact.
    """
    lines = ["# u1 v1 u2 v2 a1 a2 a3 a4"]
    for ac in correspondences:
        pp, aff = ac.points, ac.affinity
        lines.append(" ".join("%.17g" % v for v in (
            pp.u1, pp.v1, pp.u2, pp.v2, aff.a1, aff.a2, aff.a3, aff.a4)))
    Path(path).write_text("\n".join(lines) + "\n")


def write_ground_truth(scene, path) -> None:
    """JSON sidecar with the scene's focal length, F, pose, and patch normals."""
    payload = {
        "f": scene.focal,
        "F": [float(v) for v in scene.fundamental.reshape(-1)],
        "pose": {
            "rotation": [float(v) for v in scene.pose.rotation.reshape(-1)],
            "translation": [float(v) for v in scene.pose.translation],
            "baseline": scene.baseline,
        },
        "normals": [[float(v) for v in c.normal] for c in scene.correspondences],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def emit_report(result: EstimationResult, json_path, csv_path=None) -> None:
    """Write the estimation report JSON and the 512-point density curve CSV.

    The CSV lands next to the JSON with a ``_density.csv`` suffix unless an
    explicit path is given.  Output bytes are deterministic for a fixed seed.
    """
    if not result.pool.entries:
        raise EmptyPool("cannot report an empty pool")
    json_path = Path(json_path)
    if csv_path is None:
        csv_path = json_path.with_name(json_path.stem + "_density.csv")

    config = asdict(result.config)
    payload = {
        "selected_focal": result.focal,
        "fundamental": [float(v) for v in result.fundamental.reshape(-1)],
        "kernel_voting_focal": result.kernel_voting_focal,
        "median_shift_mode": result.median_shift_mode,
        "pool": [{"focal": e.focal, "sample": e.sample_index}
                 for e in result.pool.entries],
        "config": config,
        "seed": result.config.seed,
    }
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")

    rows = ["x,density"]
    for x, y in zip(result.density_x, result.density_y):
        rows.append("%.17g,%.17g" % (x, y))
    Path(csv_path).write_text("\n".join(rows) + "\n")
