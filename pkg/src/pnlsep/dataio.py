"""CSV ingestion and emission for electrode recordings.

Files are plain comma-separated tables with a decimal point, one row per
time sample and one column per channel; an optional single header row names
the channels. Loading transposes into the channel-major layout used
everywhere else.
"""
from __future__ import annotations

import csv
from pathlib import Path

from .errors import DataError
from .signals import SignalMatrix


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"non-numeric cell {cell!r} at row {row}, column {col}") from None


def load_csv(path: str | Path) -> SignalMatrix:
    """Read a recording; columns become channels."""
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")

    width = len(rows[0])
    for index, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"ragged table in {path}: row {index} has {len(row)} cells, expected {width}"
            )

    labels = None
    start = 0
    header_like = any(not _is_number(cell) for cell in rows[0])
    if header_like:
        labels = tuple(cell.strip() for cell in rows[0])
        start = 1
    data = [
        [_parse_cell(cell, row_index, col_index) for col_index, cell in enumerate(row)]
        for row_index, row in enumerate(rows[start:], start=start)
    ]
    if not data:
        raise DataError(f"{path} has a header but no samples")
    columns = list(zip(*data))
    return SignalMatrix(columns, labels=labels)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_csv(path: str | Path, signals: SignalMatrix) -> None:
    """Write a recording; rows are time samples. Full float precision."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        if signals.labels is not None:
            writer.writerow(signals.labels)
        for t in range(signals.n_samples):
            writer.writerow([repr(float(v)) for v in signals.data[:, t]])
