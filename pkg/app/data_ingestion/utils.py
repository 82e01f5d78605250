import logging
import re

from fastapi import UploadFile

logger = logging.getLogger(__name__)


# ============================================================================
# CONFIGURATION
# ============================================================================

class Config:
    """Dataset ingestion limits"""
    MAX_FILE_SIZE_MB = 5
    TEXT_EXTENSIONS = ['.txt', '.dat']
    TABLE_EXTENSIONS = ['.csv', '.xlsx', '.xls']
    ALLOWED_EXTENSIONS = TEXT_EXTENSIONS + TABLE_EXTENSIONS
    # "-" stands for a missing cell in printed listings
    PLACEHOLDER = '-'
    COMMENT = '#'


# Plain decimal or scientific notation; rejects "nan", "inf" and digit separators
NUMBER_RE = re.compile(r'^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$')
TOKEN_RE = re.compile(r'[^\s,;]+')


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def validate_file_size(file: UploadFile) -> bool:
    """Validate uploaded file size"""
    # Read file to check size
    file.file.seek(0, 2)  # Seek to end
    file_size = file.file.tell()
    file.file.seek(0)

    size_mb = file_size / (1024 * 1024)
    if size_mb > Config.MAX_FILE_SIZE_MB:
        logger.warning(f"File too large: {size_mb:.2f}MB (max: {Config.MAX_FILE_SIZE_MB}MB)")
        return False

    logger.info(f"File size: {size_mb:.3f}MB")
    return True


def extension_of(filename: str) -> str:
    match = re.search(r'\.[A-Za-z0-9]+$', filename or '')
    return match.group(0).lower() if match else ''
