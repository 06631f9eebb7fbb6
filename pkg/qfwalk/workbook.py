import logging
import re
from typing import Dict, Optional, Sequence

import pandas as pd
import xlsxwriter

from .errors import InvalidInputError
from .styling import HEADER_STYLE, ReportStyle
from .tables import ReportTable

logger = logging.getLogger(__name__)


class ReportWorkbook:
    """xlsxwriter workbook holding report sheets, with cached cell formats."""

    _INVALID_SHEET_CHARS = re.compile(r"[/\\?*:\[\]]")
    _RESERVED_SHEET_NAMES = ("History",)

    def __init__(self, filename: str):
        self.filename = filename
        self._workbook = xlsxwriter.Workbook(filename)
        self._format_cache: Dict[tuple, object] = {}

    def validate_worksheet_name(self, name: Optional[str]) -> None:
        r"""Reject names Excel would refuse: blank, over 31 characters, reserved, or using / \ ? * : [ ] or edge quotes."""
        if name is None:
            return
        if not name or len(name) > 31:
            raise InvalidInputError(f"Sheet name must have 1 to 31 characters, got {len(name)}")
        if self._INVALID_SHEET_CHARS.search(name) or name[0] == "'" or name[-1] == "'":
            raise InvalidInputError(f"Sheet name {name!r} contains characters Excel does not allow")
        if name in self._RESERVED_SHEET_NAMES:
            raise InvalidInputError(f"Sheet name {name!r} is reserved by Excel")

    def add_worksheet(self, name: Optional[str] = None):
        """Add a worksheet after validating its name."""
        self.validate_worksheet_name(name)
        return self._workbook.add_worksheet(name)

    def get_combined_format(self, style: Optional[ReportStyle], num_format: Optional[str]):
        """Get or create a cached xlsxwriter format object combining style and number format."""
        props = style.format_properties() if style else {}
        cache_key = (tuple(sorted(props.items())), num_format)

        if cache_key not in self._format_cache:
            format_dict = dict(props)
            if num_format:
                format_dict["num_format"] = num_format
            self._format_cache[cache_key] = self._workbook.add_format(format_dict) if format_dict else None

        return self._format_cache[cache_key]

    def write_report(self, table: ReportTable, sheet_name: str, header: Sequence[str] = ()):
        """Header lines followed by the table on a new worksheet."""
        worksheet = self.add_worksheet(sheet_name)
        column_widths: Dict[int, float] = {}
        for row, line in enumerate(header):
            worksheet.write(row, 0, line)
        table.write(worksheet, len(header) + (1 if header else 0), 0, self, column_widths)
        for col, width in column_widths.items():
            worksheet.set_column(col, col, width)
        return worksheet

    def write_frame(self, frame: pd.DataFrame, sheet_name: str, num_format: Optional[str] = "0.0000000000000000E+00"):
        """A plain data frame, for the convergence table."""
        worksheet = self.add_worksheet(sheet_name)
        header_format = self.get_combined_format(HEADER_STYLE, None)
        number_format = self.get_combined_format(None, num_format)
        for col, name in enumerate(frame.columns):
            worksheet.write(0, col, name, header_format)
            for row, value in enumerate(frame[name].tolist(), start=1):
                if pd.isna(value):
                    continue
                worksheet.write(row, col, value, number_format if isinstance(value, float) else None)
        logger.debug(f"Wrote frame of shape {frame.shape} to sheet '{sheet_name}'")
        return worksheet

    def close(self):
        """Close the workbook file."""
        self._workbook.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
