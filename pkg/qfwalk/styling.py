from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ReportStyle:
    """Visual styling for report cells."""

    bold: bool = False
    italic: bool = False
    font_color: Optional[str] = None
    bg_color: Optional[str] = None

    def format_properties(self) -> dict:
        """The xlsxwriter format properties of this style."""
        props = {}
        if self.bold:
            props["bold"] = True
        if self.italic:
            props["italic"] = True
        if self.font_color:
            props["font_color"] = self.font_color
        if self.bg_color:
            props["bg_color"] = self.bg_color
        return props


HEADER_STYLE = ReportStyle(bold=True)
TITLE_STYLE = ReportStyle(bold=True, italic=True)
PASS_STYLE = ReportStyle(font_color="#006100", bg_color="#C6EFCE")
FAIL_STYLE = ReportStyle(bold=True, font_color="#9C0006", bg_color="#FFC7CE")
