from fastapi import APIRouter
from fastapi.responses import Response

from app.routers import service_error
from app.schemas import PipelineReportModel, PipelineRequest
from app.services.pipeline import run_pipeline
from app.services.report_pdf import render_pipeline_pdf

router = APIRouter(prefix="/pipeline", tags=["Pipeline"])


def _report(data: PipelineRequest) -> PipelineReportModel:
    return PipelineReportModel.from_domain(run_pipeline(data.n, seed=data.seed, restarts=data.restarts))


@router.post("")
def pipeline(data: PipelineRequest):
    try:
        return _report(data)
    except Exception as e:
        raise service_error(e)


@router.post("/pdf")
def pipeline_pdf(data: PipelineRequest):
    try:
        pdf = render_pipeline_pdf(_report(data))
    except Exception as e:
        raise service_error(e)
    return Response(
        content=pdf,
        media_type="application/pdf",
        headers={"Content-Disposition": f'attachment; filename="pipeline_n{data.n}.pdf"'},
    )
