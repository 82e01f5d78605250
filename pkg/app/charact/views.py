import numpy as np
from fastapi import APIRouter, Query

from app.exceptions import UTError
from app.dist.service import UnitTeissier
from app.utils import http_error, sanitize_for_json
from .service import verify_characterization

router = APIRouter()


@router.get("/verify")
def verify(
    theta: float = Query(..., gt=0, description="Shape parameter"),
    points: int = Query(50, ge=1, le=500, description="Grid points in [0.02, 0.98]"),
):
    """Truncated-moment identities on an evenly spaced grid."""
    grid = np.linspace(0.02, 0.98, points) if points > 1 else np.array([0.5])
    try:
        checks = verify_characterization(UnitTeissier(theta), grid)
    except UTError as e:
        raise http_error(e)
    return sanitize_for_json({
        "theta": theta,
        "max_abs_gap": max(c.abs_gap for c in checks),
        "checks": [c.model_dump() for c in checks],
    })
