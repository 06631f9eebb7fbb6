"""Report rows and tables for the verification suites and experiments."""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from .styling import FAIL_STYLE, HEADER_STYLE, PASS_STYLE, TITLE_STYLE

if TYPE_CHECKING:
    from .workbook import ReportWorkbook

logger = logging.getLogger(__name__)

COLUMNS = ["experiment", "quantity", "computed", "reference", "residual", "tolerance", "passed"]

Number = Union[float, complex, str]


@dataclass(frozen=True)
class ReportRow:
    """One judged quantity: ``residual`` is compared against ``tolerance``."""

    experiment: str
    quantity: str
    computed: Number
    reference: Number
    residual: float
    tolerance: float
    passed: bool


def _display(value: Number) -> Number:
    if isinstance(value, complex):
        return value.real if value.imag == 0 else f"{value.real:.12g}{value.imag:+.12g}j"
    return value


def check(experiment: str, quantity: str, computed: Number, reference: Number, tolerance: float) -> ReportRow:
    """Row judged by ``|computed - reference| <= tolerance``."""
    residual = float(abs(complex(computed) - complex(reference)))
    return _judge(ReportRow(experiment, quantity, computed, reference, residual, tolerance, False))


def bound(experiment: str, quantity: str, residual: float, tolerance: float) -> ReportRow:
    """Row for a residual that should vanish."""
    residual = float(residual)
    return _judge(ReportRow(experiment, quantity, residual, 0.0, residual, tolerance, False))


def exceeds(experiment: str, quantity: str, value: float, minimum: float) -> ReportRow:
    """Row for a margin that must stay above ``minimum``."""
    value = float(value)
    row = ReportRow(experiment, quantity, value, f"> {minimum:.1e}", max(0.0, minimum - value), 0.0, value > minimum)
    if not row.passed:
        logger.warning(f"{experiment}: {quantity} = {value:.3e} does not exceed {minimum:.1e}")
    return row


def note(experiment: str, quantity: str, value: Any) -> ReportRow:
    """Informational row, always passing."""
    return ReportRow(experiment, quantity, value if isinstance(value, (int, float, complex)) else str(value), "", 0.0, 0.0, True)


def flag(experiment: str, quantity: str, computed: Any, expected: Any) -> ReportRow:
    """Row for a discrete outcome such as a rank or a boolean."""
    ok = computed == expected
    return ReportRow(experiment, quantity, str(computed), str(expected), 0.0 if ok else 1.0, 0.0, bool(ok))


def _judge(row: ReportRow) -> ReportRow:
    passed = math.isfinite(row.residual) and row.residual <= row.tolerance
    if not passed:
        logger.warning(f"{row.experiment}: {row.quantity} residual {row.residual:.3e} exceeds {row.tolerance:.1e}")
    return ReportRow(row.experiment, row.quantity, row.computed, row.reference, row.residual, row.tolerance, passed)


class ReportTable:
    """A titled list of report rows."""

    def __init__(self, title: Optional[str] = None, rows: Optional[Iterable[ReportRow]] = None):
        self.title = title
        self.rows: List[ReportRow] = list(rows) if rows else []

    def add_row(self, row: ReportRow) -> None:
        if not isinstance(row, ReportRow):
            raise TypeError("Row must be a ReportRow")
        self.rows.append(row)

    def extend(self, rows: Iterable[ReportRow]) -> None:
        for row in rows:
            self.add_row(row)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> List[ReportRow]:
        return [row for row in self.rows if not row.passed]

    def to_frame(self) -> pd.DataFrame:
        records = [
            {
                "experiment": row.experiment,
                "quantity": row.quantity,
                "computed": _display(row.computed),
                "reference": _display(row.reference),
                "residual": row.residual,
                "tolerance": row.tolerance,
                "passed": row.passed,
            }
            for row in self.rows
        ]
        return pd.DataFrame.from_records(records, columns=COLUMNS)

    def worst(self) -> pd.DataFrame:
        """Largest residual relative to its tolerance per experiment."""
        frame = self.to_frame()
        if frame.empty:
            return frame
        ratio = frame["residual"] / frame["tolerance"].replace(0.0, np.nan)
        frame = frame.assign(ratio=ratio.fillna(frame["residual"]))
        idx = frame.groupby("experiment", sort=False)["ratio"].idxmax()
        return frame.loc[idx, COLUMNS].reset_index(drop=True)

    def to_text(self) -> str:
        body = self.to_frame().to_string(index=False)
        return f"{self.title}\n{body}" if self.title else body

    def write(
        self,
        worksheet: Any,
        row: int,
        col: int,
        workbook_wrapper: "ReportWorkbook",
        column_widths: Optional[Dict[int, float]] = None,
    ) -> int:
        """Write the table to a worksheet and return the next free row."""
        current_row = row

        def track(c: int, text: Any):
            if column_widths is not None:
                width = len(str(text)) + 1.5
                column_widths[c] = max(column_widths.get(c, 0), width)

        if self.title:
            worksheet.write(current_row, col, self.title, workbook_wrapper.get_combined_format(TITLE_STYLE, None))
            track(col, self.title)
            current_row += 1

        header_format = workbook_wrapper.get_combined_format(HEADER_STYLE, None)
        for offset, name in enumerate(COLUMNS):
            worksheet.write(current_row, col + offset, name, header_format)
            track(col + offset, name)
        current_row += 1

        for _, record in self.to_frame().iterrows():
            style = PASS_STYLE if record["passed"] else FAIL_STYLE
            for offset, name in enumerate(COLUMNS):
                value = record[name]
                if name in ("residual", "tolerance"):
                    fmt = workbook_wrapper.get_combined_format(None, "0.00E+00")
                elif name == "passed":
                    fmt = workbook_wrapper.get_combined_format(style, None)
                    value = "PASS" if value else "FAIL"
                else:
                    fmt = None
                worksheet.write(current_row, col + offset, value.item() if hasattr(value, "item") else value, fmt)
                track(col + offset, value)
            current_row += 1
        logger.debug(f"Wrote report table '{self.title}' with {len(self.rows)} rows")
        return current_row
