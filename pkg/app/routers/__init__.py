from fastapi import HTTPException
from pydantic import ValidationError

from app.errors import ArgumentError, CapacityError, PreconditionError


def service_error(exc: Exception) -> HTTPException:
    """Map a service exception onto the HTTP status the routers report."""
    if isinstance(exc, (ArgumentError, PreconditionError, ValidationError)):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, CapacityError):
        return HTTPException(status_code=413, detail=str(exc))
    return HTTPException(status_code=500, detail=f"Internal error: {exc}")
