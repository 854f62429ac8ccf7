from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from app.errors import ArgumentError
from app.services.bounds import BoundsReport
from app.services.inequalities import BellInequality, BellTerm, Scenario, as_fraction, format_fraction
from app.services.linalg import ket
from app.services.product_sets import (
    OrthogonalityCheck,
    ProductVectorSet,
    PropertyCheck,
    SubsetAnnotation,
)
from app.services.tightness import TightnessReport
from app.services.upb_check import ExtendibilityReport
from app.services.witness import WitnessReport

Amplitude = list[float]
KetData = list[Amplitude]
Rational = Union[str, int, float]


def ket_to_json(vec: np.ndarray) -> KetData:
    return [[float(z.real), float(z.imag)] for z in vec]


def ket_from_json(data: KetData) -> np.ndarray:
    if any(len(pair) != 2 for pair in data):
        raise ArgumentError("amplitudes must be [re, im] pairs")
    return ket([complex(re, im) for re, im in data])


def matrix_to_json(matrix: np.ndarray) -> list[list[Amplitude]]:
    return [ket_to_json(row) for row in matrix]


def rational_text(value) -> str:
    return format_fraction(as_fraction(value))


def e_from_components(values: Optional[list[float]]) -> Optional[list[complex]]:
    """[re, im, re, im] -> two complex amplitudes."""
    if values is None:
        return None
    if len(values) != 4:
        raise ArgumentError("e needs four numbers: RE,IM,RE,IM")
    return [complex(values[0], values[1]), complex(values[2], values[3])]


# ============================================================
# PRODUCT SETS
# ============================================================

class SubsetsModel(BaseModel):
    kets: list[list[list[KetData]]]
    labels: list[list[tuple[int, int]]]


class ProductSetModel(BaseModel):
    dims: list[int]
    members: list[list[KetData]]
    subsets: Optional[SubsetsModel] = None

    def to_domain(self) -> ProductVectorSet:
        annotation = None
        if self.subsets is not None:
            annotation = SubsetAnnotation(
                kets=tuple(
                    tuple(tuple(ket_from_json(v) for v in subset) for subset in party)
                    for party in self.subsets.kets
                ),
                labels=tuple(tuple(tuple(label) for label in member) for member in self.subsets.labels),
            )
        members = tuple(tuple(ket_from_json(v) for v in member) for member in self.members)
        return ProductVectorSet(tuple(self.dims), members, annotation)

    @classmethod
    def from_domain(cls, product_set: ProductVectorSet) -> "ProductSetModel":
        subsets = None
        if product_set.annotation is not None:
            subsets = SubsetsModel(
                kets=[
                    [[ket_to_json(v) for v in subset] for subset in party]
                    for party in product_set.annotation.kets
                ],
                labels=[[list(label) for label in member] for member in product_set.annotation.labels],
            )
        return cls(
            dims=list(product_set.dims),
            members=[[ket_to_json(v) for v in member] for member in product_set.members],
            subsets=subsets,
        )


# ============================================================
# INEQUALITIES
# ============================================================

class ScenarioModel(BaseModel):
    inputs: list[int]
    outputs: list[list[int]]

    @model_validator(mode="after")
    def _shapes(self):
        if len(self.inputs) != len(self.outputs):
            raise ValueError("inputs and outputs must cover the same parties")
        for i, (m, outs) in enumerate(zip(self.inputs, self.outputs)):
            if m != len(outs):
                raise ValueError(f"party {i}: {m} inputs but {len(outs)} output counts")
        return self


class TermModel(BaseModel):
    x: list[int]
    a: list[int]
    q: str = "1/1"

    @field_validator("q", mode="before")
    @classmethod
    def _rational(cls, value):
        return rational_text(value)


class InequalityModel(BaseModel):
    scenario: ScenarioModel
    terms: list[TermModel]
    classical_bound: Optional[str] = None

    @field_validator("classical_bound", mode="before")
    @classmethod
    def _bound(cls, value):
        return None if value is None else rational_text(value)

    def to_domain(self) -> BellInequality:
        scenario = Scenario(tuple(tuple(outs) for outs in self.scenario.outputs))
        terms = tuple(BellTerm(tuple(t.x), tuple(t.a), Fraction(t.q)) for t in self.terms)
        bound = None if self.classical_bound is None else Fraction(self.classical_bound)
        return BellInequality(scenario, terms, bound)

    @classmethod
    def from_domain(cls, inequality: BellInequality) -> "InequalityModel":
        scenario = inequality.scenario
        return cls(
            scenario=ScenarioModel(inputs=list(scenario.inputs), outputs=[list(o) for o in scenario.outputs]),
            terms=[TermModel(x=list(t.x), a=list(t.a), q=format_fraction(t.q)) for t in inequality.terms],
            classical_bound=None if inequality.classical_bound is None else format_fraction(inequality.classical_bound),
        )


# ============================================================
# REPORTS
# ============================================================

class OrthogonalityModel(BaseModel):
    ok: bool
    worst_pair: Optional[tuple[int, int]] = None
    worst_overlap: float

    @classmethod
    def from_domain(cls, check: OrthogonalityCheck) -> "OrthogonalityModel":
        return cls(ok=check.ok, worst_pair=check.worst_pair, worst_overlap=check.worst_overlap)


class ViolationModel(BaseModel):
    party: int
    pair: tuple[int, int]
    overlap: float


class PropertyPModel(BaseModel):
    ok: bool
    subsets: Optional[list[list[list[int]]]] = None
    assignment: Optional[list[list[tuple[int, int]]]] = None
    violation: Optional[ViolationModel] = None

    @classmethod
    def from_domain(cls, check: PropertyCheck) -> "PropertyPModel":
        if not check.ok:
            v = check.violation
            return cls(ok=False, violation=ViolationModel(party=v.party, pair=v.pair, overlap=v.overlap))
        partition = check.partition
        return cls(
            ok=True,
            subsets=[[list(s) for s in party] for party in partition.subsets],
            assignment=[[tuple(label) for label in member] for member in partition.assignment],
        )


class BoundsReportModel(BaseModel):
    beta_c: str
    strategy: list[list[int]]
    beta_q_spectral: Optional[float] = None
    beta_q_seesaw: Optional[float] = None
    beta_n: Optional[str] = None
    nontrivial: Optional[bool] = None
    quantum_violation: Optional[bool] = None
    ns_method: Optional[str] = None
    ns_behavior: Optional[list[list[str]]] = None
    seed: int
    restarts: int

    @classmethod
    def from_domain(cls, report: BoundsReport) -> "BoundsReportModel":
        return cls(
            beta_c=format_fraction(report.beta_c),
            strategy=[list(m) for m in report.strategy.maps],
            beta_q_spectral=report.beta_q_spectral,
            beta_q_seesaw=report.beta_q_seesaw,
            beta_n=None if report.beta_n is None else format_fraction(report.beta_n),
            nontrivial=report.nontrivial,
            quantum_violation=report.quantum_violation,
            ns_method=report.ns_method,
            ns_behavior=None if report.ns_behavior is None else [
                [format_fraction(p) for p in row] for row in report.ns_behavior
            ],
            seed=report.seed,
            restarts=report.restarts,
        )


class PptModel(BaseModel):
    side: list[int]
    ppt: bool
    min_eigenvalue: float


class WitnessReportModel(BaseModel):
    epsilon: float
    epsilon_status: str
    trace_BW: float
    formula_value: float
    trace_W_rho: float
    ppt: list[PptModel]
    witness: Optional[list[list[Amplitude]]] = None
    state: Optional[list[list[Amplitude]]] = None
    seed: Optional[int] = None
    restarts: Optional[int] = None

    @classmethod
    def from_domain(cls, report: WitnessReport, operators: bool = False) -> "WitnessReportModel":
        return cls(
            epsilon=report.epsilon,
            epsilon_status=report.epsilon_status,
            trace_BW=report.trace_BW,
            formula_value=report.formula_value,
            trace_W_rho=report.trace_W_rho,
            ppt=[
                PptModel(side=list(side), ppt=report.ppt_flags[side], min_eigenvalue=report.min_pt_eigenvalues[side])
                for side in report.ppt_flags
            ],
            witness=matrix_to_json(report.witness) if operators else None,
            state=matrix_to_json(report.state) if operators else None,
            seed=report.seed,
            restarts=report.restarts,
        )


class ExtendibilityModel(BaseModel):
    unextendible: Optional[bool]
    status: str
    method: str
    witness: Optional[list[KetData]] = None
    numeric_value: Optional[float] = None
    seed: Optional[int] = None
    restarts: Optional[int] = None

    @classmethod
    def from_domain(cls, report: ExtendibilityReport) -> "ExtendibilityModel":
        return cls(
            unextendible=report.unextendible,
            status=report.status,
            method=report.method,
            witness=None if report.witness is None else [ket_to_json(v) for v in report.witness],
            numeric_value=report.numeric_value,
            seed=report.seed,
            restarts=report.restarts,
        )


class TightnessModel(BaseModel):
    polytope_dim: int
    face_dim: int
    is_facet: bool
    saturating_count: int
    saturating_indices: Optional[list[int]] = None

    @classmethod
    def from_domain(cls, report: TightnessReport, dump_vertices: bool = False) -> "TightnessModel":
        return cls(
            polytope_dim=report.polytope_dim,
            face_dim=report.face_dim,
            is_facet=report.is_facet,
            saturating_count=report.saturating_count,
            saturating_indices=list(report.saturating_indices) if dump_vertices else None,
        )


class PipelineReportModel(BaseModel):
    input: dict
    version: str
    seed: int
    restarts: int
    orthogonality: Optional[OrthogonalityModel] = None
    property_p: Optional[PropertyPModel] = None
    inequality: Optional[InequalityModel] = None
    canonical: Optional[InequalityModel] = None
    bounds: Optional[BoundsReportModel] = None
    witness: Optional[WitnessReportModel] = None
    extendibility: Optional[ExtendibilityModel] = None
    tightness: Optional[TightnessModel] = None
    skipped: dict[str, str] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)

    @classmethod
    def from_domain(cls, report) -> "PipelineReportModel":
        def optional(value, convert):
            return None if value is None else convert(value)

        return cls(
            input=report.descriptor,
            version=report.version,
            seed=report.seed,
            restarts=report.restarts,
            orthogonality=optional(report.orthogonality, OrthogonalityModel.from_domain),
            property_p=optional(report.property_p, PropertyPModel.from_domain),
            inequality=optional(report.inequality, InequalityModel.from_domain),
            canonical=optional(report.canonical, InequalityModel.from_domain),
            bounds=optional(report.bounds, BoundsReportModel.from_domain),
            witness=optional(report.witness, WitnessReportModel.from_domain),
            extendibility=optional(report.extendibility, ExtendibilityModel.from_domain),
            tightness=optional(report.tightness, TightnessModel.from_domain),
            skipped=dict(report.skipped),
            warnings=list(report.warnings),
        )


_REAL_TOKEN = re.compile(r'"__real_(\d+)__"')


def real_text(value: float) -> str:
    text = f"{value:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dump(model: BaseModel, pretty: bool = True) -> str:
    """JSON text with every finite real written at 17 significant digits."""
    reals: list[str] = []

    def tokenize(value):
        if isinstance(value, float) and math.isfinite(value):
            reals.append(real_text(value))
            return f"__real_{len(reals) - 1}__"
        if isinstance(value, dict):
            return {k: tokenize(v) for k, v in value.items()}
        if isinstance(value, list):
            return [tokenize(v) for v in value]
        return value

    data = tokenize(model.model_dump(mode="json"))
    text = json.dumps(data, indent=2) if pretty else json.dumps(data, separators=(",", ":"))
    return _REAL_TOKEN.sub(lambda m: reals[int(m.group(1))], text)


# ============================================================
# REQUESTS
# ============================================================

class GenerateRequest(BaseModel):
    family: Literal["shifts", "gyni"]
    n: int = 3
    e: Optional[list[float]] = None


class ExtendRequest(BaseModel):
    set: ProductSetModel
    e: Optional[list[float]] = None


class SetRequest(BaseModel):
    set: ProductSetModel


class FromSetRequest(BaseModel):
    set: ProductSetModel
    weights: Optional[list[Rational]] = None


class InequalityRequest(BaseModel):
    inequality: InequalityModel


class BoundsRequest(BaseModel):
    inequality: InequalityModel
    set: Optional[ProductSetModel] = None
    seed: Optional[int] = None
    restarts: Optional[int] = None


class TightnessRequest(BaseModel):
    inequality: InequalityModel
    allow_large: bool = False
    dump_vertices: bool = False


class PipelineRequest(BaseModel):
    n: int = 3
    seed: Optional[int] = None
    restarts: Optional[int] = None
