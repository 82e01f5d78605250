from fastapi import APIRouter, UploadFile, File, HTTPException

from config import settings
from app.exceptions import DatasetError
from .utils import Config, logger, validate_file_size, extension_of
from .service import parse_bytes, parse_dataset

router = APIRouter()


@router.get("/")
def read_root():
    """Ingestion info and the bundled datasets."""
    return {
        "status": "running",
        "message": "Dataset ingestion for unit-interval observations",
        "builtin_datasets": sorted(settings.BUILTIN_DATASETS),
        "allowed_extensions": Config.ALLOWED_EXTENSIONS,
        "endpoints": {
            "parse": "POST /parse (multipart/form-data)",
            "builtin": "GET /builtin/{tag}",
        }
    }


@router.post("/parse")
async def parse_upload(file: UploadFile = File(...)):
    """Parse an uploaded text or table file into observations in (0, 1)."""
    logger.info(f"Processing dataset upload: {file.filename}")

    if extension_of(file.filename) not in Config.ALLOWED_EXTENSIONS:
        raise HTTPException(status_code=400, detail="Invalid file type")
    if not validate_file_size(file):
        raise HTTPException(status_code=413, detail=f"File exceeds {Config.MAX_FILE_SIZE_MB}MB")

    contents = await file.read()
    try:
        dataset = parse_bytes(contents, file.filename)
    except DatasetError as e:
        logger.error(f"Ingestion error: {e}")
        raise HTTPException(status_code=400, detail={
            "message": str(e), "line": e.line, "column": e.column, "token": e.token,
        })
    return {**dataset.model_dump(), "n": dataset.n}


@router.get("/builtin/{tag}")
def builtin(tag: str):
    if tag not in settings.BUILTIN_DATASETS:
        raise HTTPException(status_code=404, detail=f"Unknown dataset '{tag}'")
    dataset = parse_dataset(tag)
    return {**dataset.model_dump(), "n": dataset.n}
