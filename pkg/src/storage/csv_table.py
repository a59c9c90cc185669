"""Locale-independent CSV tables for command output."""
import csv
import io
import math
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence

SIGNIFICANT_DIGITS = 10


def format_cell(value: Any) -> str:
    """Render one cell: floats with 10 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


class CsvTable:
    """Header, data rows and trailing '#' comment lines."""

    def __init__(self, header: Sequence[str]):
        """Initialize table.

        Args:
            header: Column names
        """
        self.header = list(header)
        self.rows: List[List[str]] = []
        self.comments: List[str] = []

    def add_row(self, values: Sequence[Any]):
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} cells, header has {len(self.header)}")
        self.rows.append([format_cell(v) for v in values])

    def add_comment(self, text: str):
        self.comments.append(text)

    def render(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        for comment in self.comments:
            buffer.write(f"# {comment}\n")
        return buffer.getvalue()

    def write(self, out: Optional[str] = None):
        """Write to a file path, or to stdout when no path is given."""
        text = self.render()
        if out:
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            with open(out, 'w', newline="", encoding="utf-8") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()
