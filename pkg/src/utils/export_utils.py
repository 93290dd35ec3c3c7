import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from src import __version__
from src.core.errors import ExportFailure

logger = logging.getLogger(__name__)

TOOL_NAME = "optomech-tmm"
UNITS = "hbar = c = 1; lengths in 1/k0; force in hbar k0 flux; diffusion in (hbar k0)^2 flux; kBT in hbar c k0"
FLOAT_FORMAT = "%.16e"
FORMATS = ("csv", "json", "xlsx")


def _clean(value: Any) -> Any:
    """JSON-safe copy: NaN and infinities become null, numpy scalars become python ones."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ExportManager:
    """Writes result tables with the run metadata in front of the data."""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}

    def metadata(self) -> Dict[str, Any]:
        return {"tool": TOOL_NAME, "version": __version__, "units": UNITS, "config": self.config}

    def header_lines(self) -> str:
        meta = self.metadata()
        return (f"# tool: {meta['tool']} {meta['version']}\n"
                f"# units: {meta['units']}\n"
                f"# config: {json.dumps(_clean(meta['config']), separators=(',', ':'))}\n")

    def to_csv_text(self, df: pd.DataFrame) -> str:
        return self.header_lines() + df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    def to_json_report(self, df: pd.DataFrame) -> Dict[str, Any]:
        rows = [[_clean(v) for v in row] for row in df.itertuples(index=False, name=None)]
        report = self.metadata()
        report.update({"columns": list(df.columns), "rows": rows})
        return _clean(report)

    def export_df(self, df: pd.DataFrame, path: str, fmt: str = "csv") -> Path:
        if fmt not in FORMATS:
            raise ValueError(f"unknown output format '{fmt}'")
        out = Path(path)
        try:
            if out.parent and not out.parent.exists():
                out.parent.mkdir(parents=True, exist_ok=True)
            if fmt == "csv":
                out.write_text(self.to_csv_text(df), encoding="utf-8")
            elif fmt == "json":
                out.write_text(json.dumps(self.to_json_report(df), indent=2) + "\n", encoding="utf-8")
            else:
                self.export_excel({"data": df}, out)
        except OSError as e:
            raise ExportFailure(f"cannot write {out}: {e}") from e
        logger.info("wrote %d rows to %s (%s)", len(df), out, fmt)
        return out

    def export_excel(self, sheets: Dict[str, pd.DataFrame], path: Path) -> None:
        meta = pd.DataFrame(
            [("tool", TOOL_NAME), ("version", __version__), ("units", UNITS),
             ("config", json.dumps(_clean(self.config), separators=(",", ":")))],
            columns=["key", "value"],
        )
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            for name, df in sheets.items():
                # Excel sheet names are limited to 31 characters
                df.to_excel(writer, sheet_name=name[:31], index=False)
            meta.to_excel(writer, sheet_name="metadata", index=False)
