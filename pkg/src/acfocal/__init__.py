"""Focal length and fundamental matrix of a semi-calibrated camera pair from
two affine correspondences, with robust root selection and a synthetic
evaluation harness."""

from .errors import (
    AcfocalError,
    AllCheiralityFail,
    DegenerateConfiguration,
    DegenerateRay,
    EmptyPool,
    FieldOfViewExhausted,
    InsufficientCorrespondences,
    InterpolationIllConditioned,
    NoRealRoot,
    NormalEstimationFailed,
    NoSurvivingRoots,
    ParseError,
    PlaneThroughCenter,
    ZeroPolynomial,
)
from .gating import (
    FocalLimits,
    ObservabilityCheck,
    ObservabilityReport,
    gate_observability,
    gate_physical,
    half_sphere_contains,
)
from .geometry import (
    AffineCorrespondence,
    LocalAffinity,
    PointPair,
    RelativePose,
    ScenePoint,
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
from .harness import (
    EstimationConfig,
    EstimationResult,
    SampleDiagnostics,
    emit_report,
    estimate,
    load_correspondences,
    ransac_iterations,
    save_correspondences,
    write_ground_truth,
)
from .polysolve import (
    MatrixPolynomial,
    UnivariatePolynomial,
    det_poly,
    real_positive_roots,
)
from .selection import (
    CandidatePool,
    PoolEntry,
    SelectionConfig,
    kde_gradient_ascent,
    kde_values,
    kernel_voting,
    median_shift,
    tukey_median,
)
from .solver import (
    CandidateSolution,
    GateFlags,
    NullBasis,
    build_rows,
    build_system,
    coefficients_from_monomials,
    cubic_monomials,
    null_basis,
    solve_two_ac,
    trace_coefficient_matrix,
)
from .synth import (
    Plane,
    SceneConfig,
    SyntheticCorrespondence,
    SyntheticScene,
    add_noise,
    affinity_from_plane,
    generate,
)

__version__ = "0.1.0"
