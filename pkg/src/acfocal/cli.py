"""Command-line interface.

Subcommands: ``synth`` writes a synthetic scene to the correspondence text
format with a ground-truth JSON sidecar; ``solve`` runs a single minimal
sample and prints every candidate with its gate flags; ``estimate`` runs the
full robust loop and writes a report; ``ransac-iters`` prints iteration
budgets.  Exit codes: 0 success, 2 parse error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import AcfocalError, ParseError
from .gating import FocalLimits, gate_observability, gate_physical
from .harness import (
    EstimationConfig,
    emit_report,
    estimate,
    load_correspondences,
    ransac_iterations,
    save_correspondences,
    write_ground_truth,
)
from .selection import SelectionConfig
from .solver import solve_two_ac
from .synth import SceneConfig, generate


def _add_principal_point(parser):
    parser.add_argument("--principal-point", nargs=2, type=float, default=(0.0, 0.0),
                        metavar=("CX", "CY"),
                        help="principal point subtracted from input coordinates")


def _cmd_synth(args) -> int:
    config = SceneConfig(
        focal=args.focal, plane_count=args.planes,
        samples_per_plane=args.samples_per_plane, noise_sigma=args.noise,
        outlier_fraction=args.outlier_fraction, aspect_ratio=args.aspect,
        seed=args.seed)
    scene = generate(config)
    save_correspondences(scene.measured, args.out)
    if args.truth:
        write_ground_truth(scene, args.truth)
    print(f"wrote {len(scene.correspondences)} correspondences to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    correspondences = load_correspondences(args.input, args.principal_point)
    i, j = args.indices
    if not (0 <= i < len(correspondences) and 0 <= j < len(correspondences)):
        raise ParseError(f"correspondence indices {i},{j} out of range "
                         f"(file has {len(correspondences)})")
    candidates = solve_two_ac(correspondences[i], correspondences[j])
    limits = FocalLimits(args.min_focal, args.max_focal)
    physical = {id(c): True for c in gate_physical(candidates, limits)}
    sample = [correspondences[i], correspondences[j]]
    print("focal tau trace_residual physical observability")
    for cand in candidates:
        phys = id(cand) in physical
        if phys:
            try:
                obs, _ = gate_observability(cand, sample)
            except AcfocalError:
                obs = False
        else:
            obs = "-"
        print(f"{cand.focal:.6g} {cand.tau:.6e} {cand.trace_residual_norm:.3e} "
              f"{phys} {obs}")
    return 0


def _cmd_estimate(args) -> int:
    correspondences = load_correspondences(args.input, args.principal_point)
    config = EstimationConfig(
        iterations=args.iterations,
        selection=SelectionConfig(bandwidth=args.bandwidth),
        limits=FocalLimits(args.min_focal, args.max_focal),
        principal_point=tuple(args.principal_point),
        seed=args.seed,
        voting_domain=args.domain,
        reference_focal=args.reference_focal)
    result = estimate(correspondences, config)
    print(f"focal {result.focal:.6f}")
    print(f"kernel_voting {result.kernel_voting_focal:.6f}")
    print(f"pool_size {len(result.pool.entries)}")
    if args.report:
        emit_report(result, args.report, args.density)
        print(f"report written to {args.report}")
    return 0


def _cmd_ransac_iters(args) -> int:
    print("sample_size outlier_ratio confidence iterations")
    for m in args.sample_size:
        for ratio in args.outlier_ratio:
            k = ransac_iterations(m, ratio, args.confidence)
            print(f"{m} {ratio} {args.confidence} {k}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acfocal",
        description="Focal length and fundamental matrix from two affine "
                    "correspondences")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--focal", type=float, default=600.0)
    p.add_argument("--planes", type=int, default=5)
    p.add_argument("--samples-per-plane", type=int, default=50)
    p.add_argument("--noise", type=float, default=0.0, help="pixel noise sigma")
    p.add_argument("--outlier-fraction", type=float, default=0.0)
    p.add_argument("--aspect", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="correspondence output file")
    p.add_argument("--truth", help="ground-truth JSON sidecar path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("solve", help="solve one minimal sample")
    p.add_argument("input")
    p.add_argument("--indices", nargs=2, type=int, default=(0, 1),
                   metavar=("I", "J"))
    p.add_argument("--min-focal", type=float, default=100.0)
    p.add_argument("--max-focal", type=float, default=500000.0)
    _add_principal_point(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("estimate", help="robust estimation over many samples")
    p.add_argument("input")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--bandwidth", type=float, default=10.0)
    p.add_argument("--min-focal", type=float, default=100.0)
    p.add_argument("--max-focal", type=float, default=500000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--domain", choices=("focal_px", "relative_percent"),
                   default="focal_px")
    p.add_argument("--reference-focal", type=float, default=None,
                   help="reference for relative-percent voting "
                        "(default: pool median)")
    p.add_argument("--report", help="report JSON output path")
    p.add_argument("--density", help="density CSV output path")
    _add_principal_point(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("ransac-iters", help="print RANSAC iteration budgets")
    p.add_argument("--sample-size", nargs="+", type=int, required=True)
    p.add_argument("--outlier-ratio", nargs="+", type=float, required=True)
    p.add_argument("--confidence", type=float, default=0.95)
    p.set_defaults(func=_cmd_ransac_iters)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AcfocalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
