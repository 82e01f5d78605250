import os
import math
import logging
from enum import Enum
from logging.handlers import RotatingFileHandler

import numpy as np
import pandas as pd
from fastapi import HTTPException

from config import settings
from app.exceptions import ConvergenceError, UTDomainError

# ============================================================================
# LOGGING SETUP
# ============================================================================

LOGGER_NAME = "ut_toolkit"


def setup_logging():
    """Configure the toolkit logger (rotating file + console)"""
    logger = logging.getLogger(LOGGER_NAME)
    if getattr(logger, "_ut_configured", False):
        return logger

    level = getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logger.setLevel(level)

    # Formatter
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    if settings.LOG_TO_FILE:
        # Create logs directory if it doesn't exist
        os.makedirs(settings.LOG_DIR, exist_ok=True)
        # Rotating file handler (max 10MB, keep 5 backups)
        file_handler = RotatingFileHandler(
            os.path.join(settings.LOG_DIR, settings.LOG_FILE),
            maxBytes=10*1024*1024,
            backupCount=5
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # Console handler
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Service modules log under "app.*"; route them through the same handlers
    app_logger = logging.getLogger("app")
    app_logger.setLevel(level)
    for handler in logger.handlers:
        app_logger.addHandler(handler)

    logger._ut_configured = True
    return logger


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def sanitize_for_json(obj):
    """
    Recursively convert objects to be JSON serializable.
    Handles NaN, Infinity, numpy scalars/arrays, pandas objects and pydantic models.
    """
    if isinstance(obj, dict):
        return {(k.value if isinstance(k, Enum) else str(k)): sanitize_for_json(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [sanitize_for_json(v) for v in obj]
    elif isinstance(obj, np.ndarray):
        return [sanitize_for_json(v) for v in obj.tolist()]
    elif isinstance(obj, np.generic):
        return sanitize_for_json(obj.item())
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return obj
    elif isinstance(obj, pd.DataFrame):
        return sanitize_for_json(obj.to_dict('records'))
    elif hasattr(obj, 'model_dump'):
        return sanitize_for_json(obj.model_dump(mode='python'))
    elif hasattr(obj, 'to_dict'):  # For any other pandas objects
        return sanitize_for_json(obj.to_dict())
    else:
        return obj


def http_error(exc: Exception):
    """Map a toolkit exception to the HTTPException a view should raise"""

    if isinstance(exc, UTDomainError):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, ConvergenceError):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def frame_to_markdown(df: pd.DataFrame, decimals: int = 5) -> str:
    """Pipe table with floats at fixed precision"""

    def cell(value):
        if isinstance(value, (float, np.floating)):
            return f"{value:.{decimals}f}"
        return str(value).replace("|", "\\|")

    header = "| " + " | ".join(str(c) for c in df.columns) + " |"
    rule = "|" + "---|" * len(df.columns)
    body = ["| " + " | ".join(cell(v) for v in row) + " |" for row in df.itertuples(index=False)]
    return "\n".join([header, rule, *body]) + "\n"
