import logging

from fastapi import FastAPI

from app import __version__
from app.config import log_level
from app.routers import inequalities, pipeline, sets

logging.basicConfig(level=log_level())

app = FastAPI(title="UPB Bell inequalities", version=__version__)

app.include_router(sets.router)
app.include_router(inequalities.router)
app.include_router(pipeline.router)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}
