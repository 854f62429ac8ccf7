"""End-to-end reproduction: product set -> inequality -> bounds, witness, UPB check, tightness."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from app import __version__
from app.config import default_restarts, default_seed, max_tight_vertices
from app.errors import ArgumentError, PreconditionError
from app.services.bounds import BoundsReport, bell_operator, bounds_report, projectors_from_partition
from app.services.families import gyni_upb, shifts_upb
from app.services.inequalities import BellInequality, inequality_from_set, relabel_canonical
from app.services.product_sets import (
    OrthogonalityCheck,
    ProductVectorSet,
    PropertyCheck,
    check_property_P,
    gram_orthogonality_check,
    span_projector,
)
from app.services.tightness import TightnessReport, is_tight
from app.services.upb_check import ExtendibilityReport, unextendible_general, unextendible_qubit
from app.services.witness import WitnessReport, product_epsilon, upb_witness

logger = logging.getLogger(__name__)

# the exact LP grows as (inputs * outputs)^n; larger scenarios are skipped in the pipeline
NS_MAX_PARTIES = 4


@dataclass
class PipelineReport:
    descriptor: dict
    seed: int
    restarts: int
    version: str = __version__
    orthogonality: Optional[OrthogonalityCheck] = None
    property_p: Optional[PropertyCheck] = None
    inequality: Optional[BellInequality] = None
    canonical: Optional[BellInequality] = None
    bounds: Optional[BoundsReport] = None
    witness: Optional[WitnessReport] = None
    extendibility: Optional[ExtendibilityReport] = None
    tightness: Optional[TightnessReport] = None
    skipped: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def family_set(n: int) -> tuple[ProductVectorSet, dict]:
    if n < 3:
        raise ArgumentError(f"the pipeline families start at n = 3, got {n}")
    if n == 3:
        return shifts_upb(), {"family": "shifts", "n": 3}
    return gyni_upb(n), {"family": "gyni", "n": n}


def run_pipeline(n: int, seed: Optional[int] = None, restarts: Optional[int] = None) -> PipelineReport:
    product_set, descriptor = family_set(n)
    return run_pipeline_for_set(product_set, descriptor, seed=seed, restarts=restarts)


def run_pipeline_for_set(
    product_set: ProductVectorSet,
    descriptor: dict,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
    weights: Optional[Sequence] = None,
) -> PipelineReport:
    seed = default_seed() if seed is None else seed
    restarts = default_restarts() if restarts is None else restarts
    report = PipelineReport(descriptor=dict(descriptor), seed=seed, restarts=restarts)

    # ---------------------------------
    # 1. Set checks
    # ---------------------------------
    report.orthogonality = gram_orthogonality_check(product_set)
    report.property_p = check_property_P(product_set)
    qubits = all(d == 2 for d in product_set.dims)
    report.extendibility = unextendible_qubit(product_set) if qubits else unextendible_general(product_set)

    if not report.property_p.ok:
        for name in ("inequality", "bounds", "witness", "tightness"):
            report.skipped[name] = "property (P) fails"
        return report
    if product_set.n == 2 and report.extendibility.status == "unextendible":
        message = "bipartite set with property (P) reported unextendible; no such UPB exists"
        logger.warning(message)
        report.warnings.append(message)

    # ---------------------------------
    # 2. Inequality and bounds
    # ---------------------------------
    partition = report.property_p.partition
    inequality = inequality_from_set(product_set, partition, weights)
    projectors = projectors_from_partition(partition)
    include_ns = product_set.n <= NS_MAX_PARTIES
    if not include_ns:
        report.skipped["beta_n"] = f"nonsignalling LP runs for at most {NS_MAX_PARTIES} parties"
    report.bounds = bounds_report(
        inequality,
        projectors=projectors,
        local_dims=list(product_set.dims),
        seed=seed,
        restarts=restarts,
        include_ns=include_ns,
    )
    inequality = inequality.with_classical_bound(report.bounds.beta_c)
    report.inequality = inequality
    report.canonical = relabel_canonical(inequality)

    # ---------------------------------
    # 3. Witness (UPBs only)
    # ---------------------------------
    if not report.orthogonality.ok:
        report.skipped["witness"] = "the set is not orthogonal"
    elif report.extendibility.status != "unextendible":
        report.skipped["witness"] = f"the set is {report.extendibility.status}, not a UPB"
    else:
        pi = span_projector(product_set)
        epsilon = product_epsilon(pi, product_set.dims, restarts=restarts, seed=seed)
        report.witness = upb_witness(
            product_set,
            epsilon.value,
            bell_operator=bell_operator(inequality, projectors),
            seed=epsilon.seed,
            restarts=epsilon.restarts,
        )

    # ---------------------------------
    # 4. Tightness
    # ---------------------------------
    vertices = inequality.scenario.strategy_count()
    if vertices > max_tight_vertices():
        report.skipped["tightness"] = f"{vertices} local vertices exceed the configured {max_tight_vertices()}"
    else:
        report.tightness = is_tight(inequality)
    return report


BOUND_KINDS = ("classical", "spectral", "seesaw", "ns", "all")


def bounds_by_kind(
    kind: str,
    inequality: BellInequality,
    product_set: Optional[ProductVectorSet] = None,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
) -> BoundsReport:
    """The classical value is always included; ``kind`` selects what else is computed."""
    if kind not in BOUND_KINDS:
        raise ArgumentError(f"unknown bound kind {kind!r}; expected one of {', '.join(BOUND_KINDS)}")
    seed = default_seed() if seed is None else seed
    restarts = default_restarts() if restarts is None else restarts
    projectors = None
    if kind == "spectral" or (kind == "all" and product_set is not None):
        if product_set is None:
            raise ArgumentError("the spectral bound needs the product set whose rays give the projectors")
        check = check_property_P(product_set)
        if not check.ok:
            raise PreconditionError("the product set fails property (P); its rays do not define measurements")
        projectors = projectors_from_partition(check.partition)
    return bounds_report(
        inequality,
        projectors=projectors,
        seed=seed,
        restarts=restarts,
        include_seesaw=kind in ("seesaw", "all"),
        include_ns=kind in ("ns", "all"),
    )
