"""File formats used by the command-line interface.

Losses arrive as one nonnegative decimal per line with an optional
single ``loss`` header; hypothesis-class matrices as plain comma-
separated rows.  Trajectories leave as CSV with a fixed header and nine
significant digits, which keeps reruns byte-identical under equal seeds.
"""

import numpy as np

from .errors import CsvFormatError
from .training import TRAJECTORY_COLUMNS


def read_losses_csv(path):
    """Read a loss sample: one decimal per line, optional 'loss' header."""
    values = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                raise CsvFormatError(path, line_number, "blank line")
            if line_number == 1 and text.lower() == "loss":
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise CsvFormatError(
                    path, line_number, f"not a number: {text!r}"
                ) from None
    if not values:
        raise CsvFormatError(path, 1, "no loss values found")
    return np.asarray(values, dtype=np.float64)


def read_loss_matrix_csv(path):
    """Read a hypothesis-class loss matrix: one comma-separated row per line."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                raise CsvFormatError(path, line_number, "blank line")
            parts = text.split(",")
            try:
                row = [float(part) for part in parts]
            except ValueError:
                raise CsvFormatError(
                    path, line_number, f"not a numeric row: {text!r}"
                ) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise CsvFormatError(
                    path,
                    line_number,
                    f"expected {width} columns, found {len(row)}",
                )
            rows.append(row)
    if not rows:
        raise CsvFormatError(path, 1, "no rows found")
    return np.asarray(rows, dtype=np.float64)


def format_trajectory_csv(trajectory):
    """Render a trajectory as CSV text with nine significant digits."""
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for row in trajectory.rows:
        cells = [str(int(row[0]))]
        cells.extend(f"{value:.9g}" for value in row[1:])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_trajectory_csv(trajectory, path):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(format_trajectory_csv(trajectory))


def format_row_csv(header, cells):
    """One-row CSV with a header; None renders as NA."""
    rendered = ["NA" if cell is None else f"{cell:.9g}" for cell in cells]
    return ",".join(header) + "\n" + ",".join(rendered) + "\n"
