from __future__ import annotations

from io import BytesIO
from typing import Dict, Mapping, Optional

import pandas as pd
from openpyxl.styles import Font

NUMBER_FORMAT = "0.000000000"


def _style_sheet(writer: pd.ExcelWriter, sheet_name: str) -> None:
    ws = writer.book[sheet_name]

    for cell in ws[1]:
        cell.font = Font(bold=True)

    for row in ws.iter_rows(min_row=2):
        for cell in row:
            if isinstance(cell.value, float):
                cell.number_format = NUMBER_FORMAT


def _clean_sheet_name(name: str) -> str:
    invalid = ["[", "]", "*", "?", "/", "\\", ":"]
    cleaned = name
    for token in invalid:
        cleaned = cleaned.replace(token, " ")
    return cleaned.strip()[:31] or "Sheet"


def export_workbook(
    tables: Dict[str, pd.DataFrame],
    parameters: Optional[Mapping[str, object]] = None,
) -> BytesIO:
    """One formatted sheet per result table, preceded by a sheet of run parameters."""
    buffer = BytesIO()

    with pd.ExcelWriter(buffer, engine="openpyxl") as writer:
        if parameters:
            params_df = pd.DataFrame(
                [{"parameter": key, "value": value} for key, value in parameters.items()]
            )
            params_df.to_excel(writer, sheet_name="Parameters", index=False)
            _style_sheet(writer, "Parameters")

        written = bool(parameters)
        for name, table in tables.items():
            if table is None or table.empty:
                continue
            sheet_name = _clean_sheet_name(name)
            table.to_excel(writer, sheet_name=sheet_name, index=False)
            _style_sheet(writer, sheet_name)
            written = True

        if not written:
            pd.DataFrame({"note": ["no rows"]}).to_excel(writer, sheet_name="Results", index=False)

    buffer.seek(0)
    return buffer
