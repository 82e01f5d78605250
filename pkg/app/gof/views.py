from typing import List

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.exceptions import UTError
from app.estimate.service import Sample
from app.utils import http_error, sanitize_for_json
from .service import gof_report, pp_points

router = APIRouter()


class GofRequest(BaseModel):
    """Observations and the fitted shape parameter"""
    values: List[float] = Field(..., min_length=2, description="Observations inside (0, 1)")
    theta: float = Field(..., gt=0, description="Fitted theta")
    include_pp: bool = Field(default=False, description="Also return pp-plot points")

    class Config:
        json_schema_extra = {
            "example": {
                "values": [0.12, 0.05, 0.31, 0.02, 0.44],
                "theta": 0.35,
                "include_pp": False
            }
        }


@router.post("/report")
def report(request: GofRequest):
    """Information criteria plus W*, A*, KS and its p-value."""
    try:
        s = Sample.from_values(request.values)
        result = gof_report(s, request.theta).model_dump()
        if request.include_pp:
            result["pp_points"] = pp_points(s, request.theta)
    except UTError as e:
        raise http_error(e)
    return sanitize_for_json(result)
