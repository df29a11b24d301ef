"""
CSV, JSON and Excel export of run results, each carrying the resolved run configuration
"""

import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
import openpyxl
import pandas as pd
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from config import Config, RunConfig
from schemas import QuadratureResult, SweepReport

QUADRATURE_COLUMNS = ["u_re", "u_im", "value_re", "value_im", "err_est"]
SWEEP_COLUMNS = ["N", "u_re", "u_im", "value_re", "value_im", "target_re", "target_im", "abs_err"]
MC_COLUMNS = ["mc_re", "mc_im", "mc_band"]

def quadrature_frame(u_values: Sequence[complex], results: Sequence[QuadratureResult]) -> pd.DataFrame:
    """One row per argument: `u_re,u_im,value_re,value_im,err_est`"""
    return pd.DataFrame(
        [[u.real, u.imag, r.value.real, r.value.imag, r.abs_error_estimate + r.truncation_bound]
         for u, r in zip(u_values, results)],
        columns=QUADRATURE_COLUMNS,
    )

def sweep_frame(report: SweepReport) -> pd.DataFrame:
    has_mc = any(row.mc_value is not None for row in report.rows)
    records = []
    for row in report.rows:
        record = [row.n, row.u.real, row.u.imag, row.value.real, row.value.imag,
                  row.target.real, row.target.imag, row.abs_err]
        if has_mc:
            mc = row.mc_value if row.mc_value is not None else complex(np.nan, np.nan)
            record += [mc.real, mc.imag, row.mc_band if row.mc_band is not None else np.nan]
        records.append(record)
    return pd.DataFrame(records, columns=SWEEP_COLUMNS + (MC_COLUMNS if has_mc else []))

def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


class ReportExporter:
    """Writes CSV/JSON reports (stdout or file) and optional Excel workbooks"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config
        self.logger = logging.getLogger(__name__)

        # Workbook styles
        self.header_font = Font(bold=True, color="FFFFFF")
        self.header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
        self.subheader_font = Font(bold=True, color="000000")
        self.subheader_fill = PatternFill(start_color="D9E1F2", end_color="D9E1F2", fill_type="solid")
        self.border = Border(
            left=Side(style='thin'),
            right=Side(style='thin'),
            top=Side(style='thin'),
            bottom=Side(style='thin')
        )

    def render_csv(self, frame: pd.DataFrame, run_config: RunConfig) -> str:
        buffer = io.StringIO()
        buffer.write(run_config.header_line() + "\n")
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()

    def render_json(self, payload: Dict[str, Any], run_config: RunConfig) -> str:
        document = {"config": json.loads(run_config.to_json())}
        document.update(_jsonable(payload))
        return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def emit(self, text: str, out: Optional[str] = None) -> Optional[str]:
        """Write to `out` (UTF-8) or to stdout"""
        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return None
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        self.logger.info(f"Wrote {path}")
        return str(path)

    def write_csv(self, frame: pd.DataFrame, run_config: RunConfig, out: Optional[str] = None) -> Optional[str]:
        return self.emit(self.render_csv(frame, run_config), out)

    def write_json(self, payload: Dict[str, Any], run_config: RunConfig, out: Optional[str] = None) -> Optional[str]:
        return self.emit(self.render_json(payload, run_config), out)

    def export_sweep_workbook(self, report: SweepReport, run_config: RunConfig, output_path: str) -> str:
        """
        Export a sweep to an Excel workbook

        Args:
            report: Sweep results
            run_config: Resolved configuration, stored on its own sheet
            output_path: Path for the Excel file; relative paths go under the configured output directory

        Returns:
            Path to the created Excel file
        """
        try:
            self.logger.info(f"Starting Excel export for {report.target_kind} sweep")
            wb = openpyxl.Workbook()
            wb.remove(wb.active)

            self._create_table_sheet(wb, "Sweep", sweep_frame(report))
            self._create_trend_sheet(wb, report)
            self._create_config_sheet(wb, run_config)

            path = self._workbook_path(output_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            wb.save(path)
            wb.close()
            self.logger.info(f"Excel file exported successfully to: {path}")
            return str(path)
        except Exception as e:
            self.logger.error(f"Error exporting to Excel: {e}")
            raise

    def _workbook_path(self, output_path: str) -> Path:
        path = Path(output_path)
        if path.is_absolute() or self.config is None:
            return path
        return self.config.ensure_output_dir() / path

    def _style_header(self, ws, n_columns: int, row: int = 1):
        for col in range(1, n_columns + 1):
            cell = ws.cell(row=row, column=col)
            cell.font = self.header_font
            cell.fill = self.header_fill
            cell.border = self.border
            cell.alignment = Alignment(horizontal="center")

    def _create_table_sheet(self, wb: openpyxl.Workbook, title: str, frame: pd.DataFrame):
        ws = wb.create_sheet(title)
        ws.append(list(frame.columns))
        self._style_header(ws, len(frame.columns))
        for record in frame.itertuples(index=False):
            ws.append([None if isinstance(v, float) and np.isnan(v) else v for v in record])
        for col in range(1, len(frame.columns) + 1):
            ws.column_dimensions[get_column_letter(col)].width = 16
        ws.freeze_panes = "A2"

    def _create_trend_sheet(self, wb: openpyxl.Workbook, report: SweepReport):
        ws = wb.create_sheet("Trend")
        headers = ["u", "spearman", "improved", "final_error"]
        ws.append(headers)
        self._style_header(ws, len(headers))
        for label, stats in report.trend.items():
            spearman = stats["spearman"]
            ws.append([label, None if not np.isfinite(spearman) else spearman, stats["improved"], stats["final_error"]])
        for col in range(1, len(headers) + 1):
            ws.column_dimensions[get_column_letter(col)].width = 16

    def _create_config_sheet(self, wb: openpyxl.Workbook, run_config: RunConfig):
        ws = wb.create_sheet("Config")
        ws.column_dimensions['A'].width = 25
        ws.column_dimensions['B'].width = 60
        row = 1
        for key, value in sorted(json.loads(run_config.to_json()).items()):
            ws[f'A{row}'] = key
            ws[f'B{row}'] = json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value
            ws[f'A{row}'].font = self.subheader_font
            ws[f'A{row}'].fill = self.subheader_fill
            ws[f'A{row}'].border = self.border
            ws[f'B{row}'].border = self.border
            row += 1
