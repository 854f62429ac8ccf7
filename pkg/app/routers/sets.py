from fastapi import APIRouter, HTTPException

from app.routers import service_error
from app.schemas import (
    ExtendibilityModel,
    ExtendRequest,
    GenerateRequest,
    OrthogonalityModel,
    ProductSetModel,
    PropertyPModel,
    SetRequest,
    e_from_components,
)
from app.services.families import LocalPairChoice, gyni_upb, recursive_extend, shifts_upb
from app.services.product_sets import check_property_P, gram_orthogonality_check
from app.services.upb_check import unextendible_general, unextendible_qubit

router = APIRouter(prefix="/sets", tags=["Sets"])

CHECK_KINDS = ("orth", "property-p", "upb")


# ============================================================
# GENERATE / EXTEND
# ============================================================

@router.post("/generate")
def generate(data: GenerateRequest):
    try:
        e = e_from_components(data.e)
        if data.family == "shifts":
            choice = None if e is None else LocalPairChoice.uniform(3, e)
            product_set = shifts_upb(choice)
        else:
            choice = None if e is None else LocalPairChoice.uniform(data.n, e)
            product_set = gyni_upb(data.n, choice)
        return ProductSetModel.from_domain(product_set)
    except HTTPException:
        raise
    except Exception as e:
        raise service_error(e)


@router.post("/extend")
def extend(data: ExtendRequest):
    try:
        extended = recursive_extend(data.set.to_domain(), e_from_components(data.e))
        return ProductSetModel.from_domain(extended)
    except HTTPException:
        raise
    except Exception as e:
        raise service_error(e)


# ============================================================
# CHECKS
# ============================================================

@router.post("/check/{kind}")
def check(kind: str, data: SetRequest):
    if kind not in CHECK_KINDS:
        raise HTTPException(status_code=400, detail=f"unknown check {kind!r}")
    try:
        product_set = data.set.to_domain()
        if kind == "orth":
            return OrthogonalityModel.from_domain(gram_orthogonality_check(product_set))
        if kind == "property-p":
            return PropertyPModel.from_domain(check_property_P(product_set))
        if all(d == 2 for d in product_set.dims):
            return ExtendibilityModel.from_domain(unextendible_qubit(product_set))
        return ExtendibilityModel.from_domain(unextendible_general(product_set))
    except HTTPException:
        raise
    except Exception as e:
        raise service_error(e)
