import logging

from fastapi import APIRouter, HTTPException

from config import settings
from app.exceptions import UTError
from app.utils import http_error, sanitize_for_json
from .service import StudyConfig, aggregate_ranks, run_study

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/study")
def study(cfg: StudyConfig):
    """
    Run a small Monte Carlo study synchronously.
    Larger designs belong on the command line (`cli.py simulate`).
    """
    if cfg.replications > settings.API_MAX_REPLICATIONS:
        raise HTTPException(
            status_code=400,
            detail=f"replications must be <= {settings.API_MAX_REPLICATIONS} over HTTP",
        )
    logger.info(f"HTTP study: {len(cfg.thetas)} thetas x {len(cfg.ns)} sizes, N={cfg.replications}")
    try:
        rows = run_study(cfg, workers=1)
        ranks = aggregate_ranks(rows)
    except UTError as e:
        raise http_error(e)
    return sanitize_for_json({
        "rows": [r.model_dump(mode="json") for r in rows],
        "ranks": ranks.model_dump(mode="json"),
    })
