from __future__ import annotations

from io import BytesIO
from typing import Dict, Mapping, Optional

import pandas as pd
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle


def _fmt(value: object) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _key_value_table(data: Mapping[str, object], label_a: str = "Quantity", label_b: str = "Value") -> Optional[Table]:
    if not data:
        return None

    rows = [[label_a, label_b]] + [[str(k), _fmt(v)] for k, v in data.items()]
    table = Table(rows, hAlign="LEFT")
    table.setStyle(
        TableStyle(
            [
                ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor("#F4F4F4")),
                ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
                ("GRID", (0, 0), (-1, -1), 0.4, colors.grey),
                ("ALIGN", (1, 1), (-1, -1), "RIGHT"),
            ]
        )
    )
    return table


def _checks_table(checks_df: pd.DataFrame) -> Table:
    columns = ["suite", "check", "samples", "max_violation", "tolerance", "passed"]
    rows = [columns]
    for _, row in checks_df.iterrows():
        rows.append([_fmt(row.get(col)) for col in columns])

    table = Table(rows, hAlign="LEFT")
    style = [
        ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor("#DDEAF6")),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("FONTSIZE", (0, 0), (-1, -1), 8),
        ("GRID", (0, 0), (-1, -1), 0.5, colors.grey),
        ("ALIGN", (2, 1), (-1, -1), "RIGHT"),
    ]
    for index, passed in enumerate(checks_df.get("passed", []), start=1):
        if not passed:
            style.append(("TEXTCOLOR", (0, index), (-1, index), colors.red))
    table.setStyle(TableStyle(style))
    return table


def export_report(
    params: Mapping[str, object],
    times: Mapping[str, object],
    angles: Mapping[str, object],
    plateau: Optional[Mapping[str, object]],
    transfer: Mapping[str, object],
    checks: Optional[pd.DataFrame] = None,
) -> BytesIO:
    """PDF summary of one run: parameters, event times, critical angles, plateau, transfer and checks."""
    buffer = BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=A4, title="Cavity-Reservoir Entanglement Report")
    styles = getSampleStyleSheet()

    story = [
        Paragraph("Cavity-Reservoir Entanglement Dynamics", styles["Title"]),
        Spacer(1, 12),
        Paragraph("Times are in units of 1/kappa; angles in radians.", styles["Normal"]),
        Spacer(1, 18),
    ]

    sections: Dict[str, Mapping[str, object]] = {
        "Run Parameters": params,
        "Event Times": times,
        "Critical Angles": angles,
        "Transfer Summary": transfer,
    }
    for title, data in sections.items():
        table = _key_value_table(data)
        if table is not None:
            story.extend([Paragraph(title, styles["Heading3"]), table, Spacer(1, 12)])

    story.append(Paragraph("Block-Block Plateau", styles["Heading3"]))
    plateau_table = _key_value_table(plateau or {})
    if plateau_table is not None:
        story.extend([plateau_table, Spacer(1, 12)])
    else:
        story.extend([Paragraph("No plateau: the cross-pair concurrences never vanish together.", styles["Normal"]), Spacer(1, 12)])

    if checks is not None and not checks.empty:
        verdict = "all passed" if bool(checks["passed"].all()) else "FAILURES"
        story.extend(
            [
                Paragraph(f"Invariant Suites ({verdict})", styles["Heading3"]),
                _checks_table(checks),
                Spacer(1, 12),
            ]
        )

    doc.build(story)
    buffer.seek(0)
    return buffer
