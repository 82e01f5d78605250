from typing import Optional

from fastapi import APIRouter, Query

from app.exceptions import UTError
from app.dist.service import UnitTeissier
from app.utils import http_error, sanitize_for_json
from .service import MAX_ORDER_N, l_moments, order_stats_table

router = APIRouter()


@router.get("/order_stats")
def order_stats(
    theta: float = Query(..., gt=0, description="Shape parameter"),
    n_max: int = Query(5, ge=1, le=MAX_ORDER_N, description="Largest sample size"),
    k: Optional[int] = Query(None, ge=3, description="Optional extra moment order"),
):
    """Mean, second moment and variance of X_{r:n} for every n <= n_max."""
    try:
        df = order_stats_table(UnitTeissier(theta), n_max, k)
    except UTError as e:
        raise http_error(e)
    return sanitize_for_json({"theta": theta, "rows": df.to_dict("records")})


@router.get("/l_moments")
def population_l_moments(theta: float = Query(..., gt=0, description="Shape parameter")):
    try:
        return sanitize_for_json(l_moments(UnitTeissier(theta)).model_dump())
    except UTError as e:
        raise http_error(e)
