"""Command-line front end; JSON on stdout, diagnostics on stderr.

Exit codes: 0 success, 1 check failed, 2 usage or invalid input,
3 capacity exceeded, 4 internal error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel, ValidationError

from app import __version__
from app.config import default_restarts, default_seed, log_level
from app.errors import ArgumentError, CapacityError, PreconditionError, UpbBellError
from app.schemas import (
    BoundsReportModel,
    ExtendibilityModel,
    InequalityModel,
    OrthogonalityModel,
    PipelineReportModel,
    ProductSetModel,
    PropertyPModel,
    TightnessModel,
    WitnessReportModel,
    dump,
    e_from_components,
)
from app.services.families import LocalPairChoice, gyni_upb, recursive_extend, shifts_upb
from app.services.inequalities import as_fraction, gyni_inequality, inequality_from_set, relabel_canonical
from app.services.pipeline import BOUND_KINDS, bounds_by_kind, run_pipeline, run_pipeline_for_set
from app.services.product_sets import check_property_P, gram_orthogonality_check, span_projector
from app.services.report_pdf import render_pipeline_pdf
from app.services.tightness import is_tight
from app.services.upb_check import extendibility_report_numeric, unextendible_general, unextendible_qubit
from app.services.witness import product_epsilon, upb_witness

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_INTERNAL = 4


class CheckFailed(Exception):
    pass


# ============================================================
# I/O
# ============================================================

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_set(path: str):
    return ProductSetModel.model_validate_json(_read(path)).to_domain()


def _load_inequality(path: str):
    return InequalityModel.model_validate_json(_read(path)).to_domain()


def _emit(args, model: BaseModel) -> None:
    text = dump(model, pretty=args.format == "pretty")
    output = getattr(args, "output", None)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _summary(args, text: str) -> None:
    if args.verbose:
        sys.stderr.write(text + "\n")


def _e(text: Optional[str]):
    if text is None:
        return None
    try:
        return e_from_components([float(v) for v in text.split(",")])
    except ValueError:
        raise ArgumentError(f"--e expects RE,IM,RE,IM, got {text!r}")


def _seed(args) -> int:
    return default_seed() if args.seed is None else args.seed


def _restarts(args) -> int:
    return default_restarts() if args.restarts is None else args.restarts


# ============================================================
# COMMANDS
# ============================================================

def cmd_gen(args) -> None:
    e = _e(args.e)
    if args.family == "shifts":
        product_set = shifts_upb(None if e is None else LocalPairChoice.uniform(3, e))
    else:
        product_set = gyni_upb(args.n, None if e is None else LocalPairChoice.uniform(args.n, e))
    _summary(args, f"{args.family}: {len(product_set)} members on {product_set.n} qubits")
    _emit(args, ProductSetModel.from_domain(product_set))


def cmd_extend(args) -> None:
    extended = recursive_extend(_load_set(args.input), _e(args.e))
    _summary(args, f"extended to {len(extended)} members on {extended.n} qubits")
    _emit(args, ProductSetModel.from_domain(extended))


def cmd_check(args) -> None:
    product_set = _load_set(args.input)
    if args.kind == "orth":
        check = gram_orthogonality_check(product_set)
        _emit(args, OrthogonalityModel.from_domain(check))
        ok = check.ok
    elif args.kind == "property-p":
        check = check_property_P(product_set)
        _emit(args, PropertyPModel.from_domain(check))
        ok = check.ok
    else:
        method = args.method
        if method == "auto":
            method = "qubit" if all(d == 2 for d in product_set.dims) else "general"
        if method == "qubit":
            report = unextendible_qubit(product_set)
        elif method == "general":
            report = unextendible_general(product_set)
        else:
            report = extendibility_report_numeric(product_set, restarts=_restarts(args), seed=_seed(args))
        _emit(args, ExtendibilityModel.from_domain(report))
        ok = report.status == "unextendible"
    _summary(args, f"check {args.kind}: {'passed' if ok else 'failed'}")
    if not ok:
        raise CheckFailed(f"check {args.kind} failed")


def cmd_ineq(args) -> None:
    if args.ineq_command == "gyni":
        inequality = gyni_inequality(args.n)
    elif args.ineq_command == "canonical":
        inequality = relabel_canonical(_load_inequality(args.input))
    else:
        product_set = _load_set(args.input)
        check = check_property_P(product_set)
        if not check.ok:
            raise CheckFailed(f"property (P) fails at party {check.violation.party}")
        weights = None if args.weights is None else [as_fraction(w) for w in args.weights.split(",")]
        inequality = inequality_from_set(product_set, check.partition, weights)
    _summary(args, inequality.describe())
    _emit(args, InequalityModel.from_domain(inequality))


def cmd_bounds(args) -> None:
    inequality = _load_inequality(args.input)
    product_set = None if args.set is None else _load_set(args.set)
    report = bounds_by_kind(args.kind, inequality, product_set, seed=_seed(args), restarts=_restarts(args))
    _summary(args, f"beta_C = {report.beta_c}")
    _emit(args, BoundsReportModel.from_domain(report))


def cmd_witness(args) -> None:
    product_set = _load_set(args.input)
    epsilon = product_epsilon(span_projector(product_set), product_set.dims, restarts=_restarts(args), seed=_seed(args))
    try:
        report = upb_witness(product_set, epsilon.value, seed=epsilon.seed, restarts=epsilon.restarts)
    except PreconditionError as exc:
        raise CheckFailed(str(exc))
    _summary(args, f"epsilon = {report.epsilon:.12g}, Tr(BW) = {report.trace_BW:.12g}")
    _emit(args, WitnessReportModel.from_domain(report, operators=args.operators))


def cmd_tight(args) -> None:
    report = is_tight(_load_inequality(args.input), allow_large=args.allow_large)
    _summary(args, f"face dimension {report.face_dim} of {report.polytope_dim}")
    _emit(args, TightnessModel.from_domain(report, dump_vertices=args.dump_vertices))


def cmd_pipeline(args) -> None:
    if args.input is not None:
        report = run_pipeline_for_set(
            _load_set(args.input), {"file": args.input}, seed=_seed(args), restarts=_restarts(args)
        )
    else:
        report = run_pipeline(args.n, seed=_seed(args), restarts=_restarts(args))
    model = PipelineReportModel.from_domain(report)
    if args.pdf:
        Path(args.pdf).write_bytes(render_pipeline_pdf(model))
    if model.bounds is not None:
        _summary(args, f"beta_C = {model.bounds.beta_c}, beta_N = {model.bounds.beta_n}")
    _emit(args, model)


# ============================================================
# PARSER
# ============================================================

def _seeded(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--restarts", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="upbbell", description="UPBs and Bell inequalities without quantum violation")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--format", choices=("pretty", "compact"), default="pretty")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a Shifts or GYNI-type UPB")
    gen.add_argument("family", choices=("shifts", "gyni"))
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--e", default=None, help="RE,IM,RE,IM amplitudes of |e>")
    gen.add_argument("-o", "--output")
    gen.set_defaults(handler=cmd_gen)

    extend = sub.add_parser("extend", help="recursive n -> n+1 construction")
    extend.add_argument("-i", "--input", required=True)
    extend.add_argument("-o", "--output")
    extend.add_argument("--e", default=None)
    extend.set_defaults(handler=cmd_extend)

    check = sub.add_parser("check", help="orthogonality, property (P) or unextendibility")
    check.add_argument("kind", choices=("orth", "property-p", "upb"))
    check.add_argument("-i", "--input", required=True)
    check.add_argument("--method", choices=("auto", "qubit", "general", "numeric"), default="auto")
    _seeded(check)
    check.set_defaults(handler=cmd_check)

    ineq = sub.add_parser("ineq", help="build or canonicalize inequalities")
    ineq_sub = ineq.add_subparsers(dest="ineq_command", required=True)
    from_set = ineq_sub.add_parser("from-set")
    from_set.add_argument("-i", "--input", required=True)
    from_set.add_argument("--weights", default=None, help="comma-separated rationals, one per member")
    from_set.add_argument("-o", "--output")
    gyni = ineq_sub.add_parser("gyni")
    gyni.add_argument("--n", type=int, required=True)
    gyni.add_argument("-o", "--output")
    canonical = ineq_sub.add_parser("canonical")
    canonical.add_argument("-i", "--input", required=True)
    canonical.add_argument("-o", "--output")
    ineq.set_defaults(handler=cmd_ineq)

    bounds = sub.add_parser("bounds", help="classical, quantum and nonsignalling values")
    bounds.add_argument("kind", choices=BOUND_KINDS)
    bounds.add_argument("-i", "--input", required=True)
    bounds.add_argument("--set", default=None, help="product set whose rays give the measurements")
    _seeded(bounds)
    bounds.set_defaults(handler=cmd_bounds)

    witness = sub.add_parser("witness", help="entanglement witness and bound entangled state of a UPB")
    witness.add_argument("-i", "--input", required=True)
    witness.add_argument("--operators", action="store_true", help="include W and rho in the output")
    _seeded(witness)
    witness.set_defaults(handler=cmd_witness)

    tight = sub.add_parser("tight", help="facet check")
    tight.add_argument("-i", "--input", required=True)
    tight.add_argument("--allow-large", action="store_true")
    tight.add_argument("--dump-vertices", action="store_true")
    tight.set_defaults(handler=cmd_tight)

    pipeline = sub.add_parser("pipeline", help="full reproduction for the Shifts/GYNI family")
    source = pipeline.add_mutually_exclusive_group()
    source.add_argument("--n", type=int, default=3)
    source.add_argument("-i", "--input", default=None)
    pipeline.add_argument("--pdf", default=None, help="also write a PDF summary")
    _seeded(pipeline)
    pipeline.set_defaults(handler=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else log_level(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.handler(args)
    except CheckFailed as exc:
        logger.error("%s", exc)
        return EXIT_CHECK_FAILED
    except CapacityError as exc:
        logger.error("%s", exc)
        return EXIT_CAPACITY
    except (ArgumentError, PreconditionError, ValidationError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except UpbBellError as exc:
        logger.error("internal error: %s", exc)
        return EXIT_INTERNAL
    return EXIT_OK
