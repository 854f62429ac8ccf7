from fastapi import APIRouter, HTTPException

from app.errors import PreconditionError
from app.routers import service_error
from app.schemas import (
    BoundsReportModel,
    BoundsRequest,
    FromSetRequest,
    InequalityModel,
    InequalityRequest,
    TightnessModel,
    TightnessRequest,
)
from app.services.inequalities import gyni_inequality, inequality_from_set, relabel_canonical
from app.services.pipeline import BOUND_KINDS, bounds_by_kind
from app.services.product_sets import check_property_P
from app.services.tightness import is_tight

router = APIRouter(prefix="/inequalities", tags=["Inequalities"])


@router.post("/from-set")
def from_set(data: FromSetRequest):
    try:
        product_set = data.set.to_domain()
        check = check_property_P(product_set)
        if not check.ok:
            v = check.violation
            raise PreconditionError(f"property (P) fails at party {v.party}, rays {v.pair}")
        inequality = inequality_from_set(product_set, check.partition, data.weights)
        return InequalityModel.from_domain(inequality)
    except HTTPException:
        raise
    except Exception as e:
        raise service_error(e)


@router.get("/gyni/{n}")
def gyni(n: int):
    try:
        return InequalityModel.from_domain(gyni_inequality(n))
    except Exception as e:
        raise service_error(e)


@router.post("/canonical")
def canonical(data: InequalityRequest):
    try:
        return InequalityModel.from_domain(relabel_canonical(data.inequality.to_domain()))
    except Exception as e:
        raise service_error(e)


@router.post("/bounds/{kind}")
def bounds(kind: str, data: BoundsRequest):
    if kind not in BOUND_KINDS:
        raise HTTPException(status_code=400, detail=f"unknown bound kind {kind!r}")
    try:
        product_set = None if data.set is None else data.set.to_domain()
        report = bounds_by_kind(
            kind, data.inequality.to_domain(), product_set, seed=data.seed, restarts=data.restarts
        )
        return BoundsReportModel.from_domain(report)
    except HTTPException:
        raise
    except Exception as e:
        raise service_error(e)


@router.post("/tightness")
def tightness(data: TightnessRequest):
    try:
        report = is_tight(data.inequality.to_domain(), allow_large=data.allow_large)
        return TightnessModel.from_domain(report, dump_vertices=data.dump_vertices)
    except Exception as e:
        raise service_error(e)
