"""
Dataset Ingestion
=================
Reads unit-interval observations from whitespace / comma separated text
(with "#" comments and "-" placeholders) or from csv / xlsx tables, and
resolves built-in dataset tags such as "risk73".
"""

import io
import logging
from pathlib import Path
from typing import List, Union

import pandas as pd
from pydantic import BaseModel

from config import settings
from app.exceptions import DatasetError
from app.estimate.service import Sample
from .utils import Config, NUMBER_RE, TOKEN_RE, extension_of

logger = logging.getLogger(__name__)


class DatasetFile(BaseModel):
    """Parsed dataset; `values` keeps file order"""
    path: str
    values: List[float]
    skipped: int = 0
    comments: int = 0

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def sorted_values(self) -> List[float]:
        return sorted(self.values)

    def to_sample(self) -> Sample:
        return Sample.from_values(self.values)


# ============================================================================
# TOKEN CHECKS
# ============================================================================

def _accept(value: float, token: str, line: int, column: int) -> float:
    if not 0.0 < value < 1.0:
        raise DatasetError(f"value {token!r} lies outside (0, 1)", line=line, column=column, token=token)
    return value


def _finish(source: str, values: List[float], skipped: int, comments: int) -> DatasetFile:
    if not values:
        raise DatasetError(f"no observations found in {source}")
    logger.info(f"Parsed {len(values)} values from {source} ({skipped} placeholders, {comments} comments)")
    return DatasetFile(path=source, values=values, skipped=skipped, comments=comments)


# ============================================================================
# PARSERS
# ============================================================================

def parse_text(text: str, source: str = "<text>") -> DatasetFile:
    """
    Whitespace / comma / semicolon separated decimals, dot decimal separator.
    Everything after "#" on a line is a comment; "-" tokens are skipped.
    """
    values: List[float] = []
    skipped = 0
    comments = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw
        if Config.COMMENT in raw:
            content = raw[:raw.index(Config.COMMENT)]
            comments += 1
        for match in TOKEN_RE.finditer(content):
            token = match.group(0)
            column = match.start() + 1
            if token == Config.PLACEHOLDER:
                skipped += 1
                continue
            if not NUMBER_RE.match(token):
                raise DatasetError(f"cannot read {token!r} as a number", line=line_no, column=column, token=token)
            values.append(_accept(float(token), token, line_no, column))
    return _finish(source, values, skipped, comments)


def parse_table(df: pd.DataFrame, source: str = "<table>") -> DatasetFile:
    """Numeric cells of a header-less table, flattened row-major."""
    values: List[float] = []
    skipped = 0
    for row_no, row in enumerate(df.itertuples(index=False), start=1):
        for col_no, cell in enumerate(row, start=1):
            if cell is None or (isinstance(cell, float) and pd.isna(cell)):
                continue
            token = str(cell).strip()
            if token == Config.PLACEHOLDER:
                skipped += 1
                continue
            if not token:
                continue
            number = pd.to_numeric(token, errors='coerce')
            if pd.isna(number) or not NUMBER_RE.match(token):
                raise DatasetError(f"cannot read {token!r} as a number", line=row_no, column=col_no, token=token)
            values.append(_accept(float(number), token, row_no, col_no))
    return _finish(source, values, skipped, 0)


def parse_bytes(contents: bytes, filename: str) -> DatasetFile:
    """Dispatch on the file extension; text formats must be UTF-8."""
    ext = extension_of(filename)
    if ext in Config.TABLE_EXTENSIONS:
        try:
            if ext == '.csv':
                df = pd.read_csv(io.BytesIO(contents), header=None, dtype=str,
                                 skip_blank_lines=True, comment=Config.COMMENT)
            else:
                df = pd.read_excel(io.BytesIO(contents), header=None, dtype=str,
                                   engine='openpyxl' if ext == '.xlsx' else None)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
            raise DatasetError(f"{filename} could not be read as a table: {e}")
        return parse_table(df, filename)
    try:
        text = contents.decode('utf-8')
    except UnicodeDecodeError as e:
        raise DatasetError(f"{filename} is not UTF-8 text: {e}")
    return parse_text(text, filename)


def resolve_path(path_or_tag: Union[str, Path]) -> Path:
    tag = str(path_or_tag)
    if tag in settings.BUILTIN_DATASETS:
        return Path(settings.DATA_DIR) / settings.BUILTIN_DATASETS[tag]
    return Path(path_or_tag)


def parse_dataset(path_or_tag: Union[str, Path]) -> DatasetFile:
    """Parse a dataset file, or a built-in tag such as "risk73"."""
    path = resolve_path(path_or_tag)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path_or_tag}")
    result = parse_bytes(path.read_bytes(), path.name)
    return result.model_copy(update={"path": str(path_or_tag)})
