import logging
from typing import List, Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from pydantic import BaseModel, Field

from app.exceptions import UTError
from app.utils import http_error, sanitize_for_json
from app.data_ingestion.service import parse_bytes
from app.data_ingestion.utils import Config, extension_of, validate_file_size
from app.gof.service import gof_report
from .service import Method, Sample, fit, fit_all

logger = logging.getLogger(__name__)

router = APIRouter()


class FitRequest(BaseModel):
    """Request model for fitting theta"""
    values: List[float] = Field(..., description="Observations, each strictly inside (0, 1)")
    method: str = Field(default="MLE", description="MLE, LSE, WLSE, CRVME, MPSE, PCE, ADE, RADE, LME or 'all'")

    class Config:
        json_schema_extra = {
            "example": {
                "values": [0.0279, 0.0608, 0.0215, 0.0315, 0.004, 0.0407, 0.1333],
                "method": "MLE"
            }
        }


def _run_fit(s: Sample, method: str) -> dict:
    if method.lower() == "all":
        results = fit_all(s)
    else:
        try:
            m = Method(method)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"Unknown method '{method}'")
        results = {m: fit(m, s)}

    response = {
        "n": s.n,
        "fits": [r.model_dump(mode="json") for r in results.values()],
    }
    mle = results.get(Method.MLE)
    if mle is not None and mle.converged:
        response["gof"] = gof_report(s, mle.theta_hat).model_dump()
    return sanitize_for_json(response)


@router.post("/fit")
def fit_values(request: FitRequest):
    """Fit theta to JSON observations with one method or all nine."""
    try:
        s = Sample.from_values(request.values)
        return _run_fit(s, request.method)
    except UTError as e:
        raise http_error(e)


@router.post("/fit/upload")
async def fit_upload(file: UploadFile = File(...), method: str = Form("MLE")):
    """Parse an uploaded dataset file and fit it."""
    logger.info(f"Fitting uploaded dataset: {file.filename}")
    if extension_of(file.filename) not in Config.ALLOWED_EXTENSIONS:
        raise HTTPException(status_code=400, detail="Invalid file type")
    if not validate_file_size(file):
        raise HTTPException(status_code=413, detail=f"File exceeds {Config.MAX_FILE_SIZE_MB}MB")

    contents = await file.read()
    try:
        dataset = parse_bytes(contents, file.filename)
        response = _run_fit(dataset.to_sample(), method)
    except UTError as e:
        raise http_error(e)
    response["dataset"] = {"path": dataset.path, "skipped": dataset.skipped, "comments": dataset.comments}
    return response
