from __future__ import annotations

import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, Mapping, Optional

import numpy as np
import pandas as pd

from modules.export_excel import export_workbook

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def _plain(value: object) -> object:
    """numpy scalars to Python values; NaN and None to None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def frame_to_records(frame: pd.DataFrame) -> list:
    return [_plain(record) for record in frame.to_dict(orient="records")]


def to_json(payload: object) -> str:
    """JSON with shortest round-trip floats and null for absent values."""
    if isinstance(payload, pd.DataFrame):
        payload = frame_to_records(payload)
    return json.dumps(_plain(payload), indent=2, allow_nan=False) + "\n"


def write_text(text: str, path: Optional[str] = None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(text)


def write_table(
    frame: pd.DataFrame,
    fmt: str = "csv",
    path: Optional[str] = None,
    sheet_name: str = "Results",
    parameters: Optional[Mapping[str, object]] = None,
) -> None:
    """Write ``frame`` as csv or json (to ``path`` or stdout), or as an xlsx workbook."""
    fmt = fmt.strip().lower()
    if fmt == "csv":
        write_text(frame_to_csv(frame), path)
    elif fmt == "json":
        write_text(to_json(frame), path)
    elif fmt == "xlsx":
        if not path:
            raise ValueError("xlsx output needs --out PATH.")
        tables: Dict[str, pd.DataFrame] = {sheet_name: frame}
        Path(path).write_bytes(export_workbook(tables, parameters).getvalue())
        logger.info("Wrote %s", path)
    else:
        raise ValueError(f"Unknown output format '{fmt}'.")
