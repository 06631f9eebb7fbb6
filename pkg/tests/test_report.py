import math
from unittest.mock import MagicMock, patch

import numpy as np
import openpyxl
import pandas as pd
import pytest

from qfwalk.errors import InvalidInputError
from qfwalk.styling import FAIL_STYLE, PASS_STYLE
from qfwalk.tables import COLUMNS, ReportTable, bound, check, exceeds, flag, note
from qfwalk.workbook import ReportWorkbook


def sample_table():
    return ReportTable(
        rows=[
            check("sigma", "S on k", 0.5773502691896258, math.sqrt(1 / 3), 1e-12),
            bound("sigma", "||C^2 - S^2 - I||", 1e-15, 1e-12),
            bound("walk", "unitarity", 3e-9, 1e-12),
            flag("walk", "monotone", True, True),
        ]
    )


class TestReportRows:
    """Tests for judged report rows."""

    def test_check(self):
        """Test that check compares |computed - reference| with the tolerance."""
        assert check("e", "q", 1.0 + 1e-13, 1.0, 1e-12).passed
        row = check("e", "q", 1.0 + 2j, 1.0, 1e-12)
        assert not row.passed
        assert row.residual == pytest.approx(2.0)

    def test_bound(self):
        """Test that bound rows need a finite residual under the tolerance."""
        assert bound("e", "q", 0.0, 0.0).passed
        assert not bound("e", "q", np.inf, 1.0).passed
        assert not bound("e", "q", np.nan, 1.0).passed

    def test_exceeds(self, caplog):
        """Test margins that must stay above a minimum."""
        assert exceeds("e", "margin", 1e-3, 1e-8).passed
        with caplog.at_level("WARNING"):
            row = exceeds("e", "margin", 1e-9, 1e-8)
        assert not row.passed
        assert row.residual == pytest.approx(9e-9)
        assert row.reference == "> 1.0e-08"
        assert "does not exceed" in caplog.text

    def test_note_and_flag(self):
        """Test informational rows and discrete outcomes."""
        assert note("e", "verdict", "singleton").passed
        assert note("e", "dim", 2).computed == 2
        assert flag("e", "rank", 3, 3).passed
        mismatch = flag("e", "rank", 2, 3)
        assert not mismatch.passed
        assert (mismatch.computed, mismatch.reference) == ("2", "3")


class TestReportTable:
    """Tests for ReportTable."""

    def test_frame(self):
        """Test the frame columns and the display of complex values."""
        table = ReportTable(rows=[check("e", "z", 1 + 2j, 1 + 2j, 0.0), check("e", "x", 2 + 0j, 2.0, 0.0)])
        frame = table.to_frame()
        assert list(frame.columns) == COLUMNS
        assert frame["computed"].tolist() == ["1+2j", 2.0]

    def test_passed_and_failures(self):
        """Test the pass flag and the failure list."""
        table = sample_table()
        assert not table.passed
        assert [row.quantity for row in table.failures] == ["unitarity"]

    def test_worst(self):
        """Test the worst row per experiment relative to its tolerance."""
        worst = sample_table().worst()
        assert worst["experiment"].tolist() == ["sigma", "walk"]
        assert worst["quantity"].tolist() == ["||C^2 - S^2 - I||", "unitarity"]

    def test_worst_of_empty_table(self):
        """Test that an empty table has an empty worst frame."""
        assert ReportTable().worst().empty

    def test_add_row_type_check(self):
        """Test that only report rows are accepted."""
        with pytest.raises(TypeError):
            ReportTable().add_row(("e", "q"))

    def test_to_text(self):
        """Test the text rendering with a title."""
        text = ReportTable("verify", sample_table().rows).to_text()
        assert text.splitlines()[0] == "verify"
        assert "unitarity" in text

    def test_write(self):
        """Test cell writes and styles for a titled table."""
        worksheet = MagicMock()
        wrapper = MagicMock()
        widths = {}
        next_row = ReportTable("suite", sample_table().rows).write(worksheet, 2, 1, wrapper, widths)
        assert next_row == 2 + 1 + 1 + 4
        worksheet.write.assert_any_call(3, 1, "experiment", wrapper.get_combined_format.return_value)
        wrapper.get_combined_format.assert_any_call(PASS_STYLE, None)
        wrapper.get_combined_format.assert_any_call(FAIL_STYLE, None)
        assert set(widths) == set(range(1, 1 + len(COLUMNS)))


class TestReportWorkbook:
    """Tests for ReportWorkbook."""

    def test_valid_worksheet_names(self):
        """Test that valid worksheet names are accepted."""
        with patch("xlsxwriter.Workbook") as mock_workbook:
            mock_workbook_instance = MagicMock()
            mock_worksheet = MagicMock()
            mock_workbook_instance.add_worksheet.return_value = mock_worksheet
            mock_workbook.return_value = mock_workbook_instance

            workbook = ReportWorkbook("report.xlsx")
            for name in ["verify", "convergence", "Sheet-123", "Some'Value", "A" * 31]:
                assert workbook.add_worksheet(name) is mock_worksheet
                mock_workbook_instance.add_worksheet.assert_called_with(name)

    @pytest.mark.parametrize(
        "name",
        ["", "A" * 32, "Sheet/1", "Sheet\\1", "Sheet?1", "Sheet*1", "Sheet:1", "Sheet[1]", "'Sheet1", "Sheet1'", "History"],
    )
    def test_invalid_worksheet_names(self, name):
        """Test that names Excel rejects raise before reaching xlsxwriter."""
        with patch("xlsxwriter.Workbook") as mock_workbook:
            mock_workbook_instance = MagicMock()
            mock_workbook.return_value = mock_workbook_instance

            workbook = ReportWorkbook("report.xlsx")
            with pytest.raises(InvalidInputError):
                workbook.add_worksheet(name)
            mock_workbook_instance.add_worksheet.assert_not_called()

    def test_format_cache(self):
        """Test that equal style and number format share one xlsxwriter format."""
        with patch("xlsxwriter.Workbook") as mock_workbook:
            mock_workbook_instance = MagicMock()
            mock_workbook.return_value = mock_workbook_instance

            workbook = ReportWorkbook("report.xlsx")
            first = workbook.get_combined_format(PASS_STYLE, "0.00")
            second = workbook.get_combined_format(PASS_STYLE, "0.00")
            assert first is second
            mock_workbook_instance.add_format.assert_called_once_with(
                {"font_color": "#006100", "bg_color": "#C6EFCE", "num_format": "0.00"}
            )
            assert workbook.get_combined_format(None, None) is None

    def test_context_manager_closes(self):
        """Test that leaving the context closes the workbook."""
        with patch("xlsxwriter.Workbook") as mock_workbook:
            mock_workbook_instance = MagicMock()
            mock_workbook.return_value = mock_workbook_instance
            with ReportWorkbook("report.xlsx"):
                pass
            mock_workbook_instance.close.assert_called_once()

    def test_round_trip_through_openpyxl(self, tmp_path):
        """Test that a written report and frame read back with the expected cells."""
        path = tmp_path / "report.xlsx"
        frame = pd.DataFrame({"n": [16, 64], "tau": [0.0625, 0.015625], "abs_error": [0.1, 0.05], "ratio": [np.nan, 2.0]})
        with ReportWorkbook(str(path)) as workbook:
            workbook.write_report(sample_table(), "verify", ["qfwalk verify", "seed = 7"])
            workbook.write_frame(frame, "convergence")

        book = openpyxl.load_workbook(path)
        assert book.sheetnames == ["verify", "convergence"]
        report = book["verify"]
        assert report["A1"].value == "qfwalk verify"
        assert report["A2"].value == "seed = 7"
        assert [cell.value for cell in report[4]] == COLUMNS
        assert [report.cell(row=r, column=7).value for r in range(5, 9)] == ["PASS", "PASS", "FAIL", "PASS"]
        assert report["E7"].value == pytest.approx(3e-9)

        convergence = book["convergence"]
        assert [cell.value for cell in convergence[1]] == ["n", "tau", "abs_error", "ratio"]
        assert convergence["A3"].value == 64
        assert convergence["D2"].value is None
        assert convergence["D3"].value == pytest.approx(2.0)
