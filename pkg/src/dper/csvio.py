"""CSV ingestion and output.

Input files carry a header row and comma-separated numeric fields. A cell is
missing when it matches one of the missing tokens (default: empty, "NA",
"NaN") or parses to NaN; masked cells write back as empty fields. Floats are
printed with shortest round-trip representation, so parse -> write -> parse
preserves values bit-exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .exceptions import MissingLabel, ParseError
from .model import LabeledDataset, MaskedMatrix

DEFAULT_MISSING_TOKENS = ("", "NA", "NaN")


def csv_columns(path: str | Path) -> list[str]:
    """Header names of a CSV file."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ParseError(1, 1, "empty file: a header row is required")
    return [h.strip() for h in header]


def parse_csv(
    path: str | Path,
    label_column: str | None = None,
    missing_tokens: tuple[str, ...] = DEFAULT_MISSING_TOKENS,
) -> MaskedMatrix | LabeledDataset:
    """Parse a CSV file into a MaskedMatrix, or a LabeledDataset when
    ``label_column`` names the class column.

    Class ids are assigned by sorted label order. Labels must be complete;
    a missing label raises MissingLabel with its line number. Any cell that
    neither matches a missing token nor parses to a finite float raises
    ParseError(line, column, reason).
    """
    tokens = set(missing_tokens)
    header = csv_columns(path)
    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise ParseError(1, 1, f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)

    values: list[list[float]] = []
    mask: list[list[bool]] = []
    labels: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    line_no, 1, f"expected {len(header)} fields, got {len(row)}"
                )
            vrow: list[float] = []
            mrow: list[bool] = []
            for col_no, cell in enumerate(row, start=1):
                text = cell.strip()
                if label_idx is not None and col_no - 1 == label_idx:
                    if text in tokens:
                        raise MissingLabel(line_no)
                    labels.append(text)
                    continue
                if text in tokens:
                    vrow.append(np.nan)
                    mrow.append(False)
                    continue
                try:
                    x = float(text)
                except ValueError:
                    raise ParseError(line_no, col_no, f"not a number: {text!r}") from None
                if np.isnan(x):
                    vrow.append(np.nan)
                    mrow.append(False)
                elif np.isinf(x):
                    raise ParseError(line_no, col_no, "infinite values are not allowed")
                else:
                    vrow.append(x)
                    mrow.append(True)
            values.append(vrow)
            mask.append(mrow)

    if not values:
        raise ParseError(2, 1, "no data rows")
    matrix = MaskedMatrix(values=np.array(values), mask=np.array(mask))
    if label_idx is None:
        return matrix
    classes = sorted(set(labels))
    class_id = {name: k for k, name in enumerate(classes)}
    return LabeledDataset(
        data=matrix,
        labels=np.array([class_id[name] for name in labels], dtype=np.int64),
        n_classes=len(classes),
    )


def feature_names(path: str | Path, label_column: str | None = None) -> list[str]:
    names = csv_columns(path)
    if label_column is not None and label_column in names:
        names = [n for n in names if n != label_column]
    return names


def class_names(path: str | Path, label_column: str) -> list[str]:
    """Sorted distinct labels, matching parse_csv's class-id assignment."""
    idx = csv_columns(path).index(label_column)
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                seen.add(row[idx].strip())
    return sorted(seen)


def write_csv(
    data: MaskedMatrix | LabeledDataset,
    path: str | Path,
    feature_names: list[str] | None = None,
    label_column: str = "label",
    label_values: list[str] | None = None,
) -> None:
    """Write a matrix (or labeled dataset) as CSV; masked cells become
    empty fields, floats print with full round-trip precision."""
    if isinstance(data, LabeledDataset):
        matrix = data.data
        if label_values is None:
            label_values = [str(g) for g in data.labels]
    else:
        matrix = data
        label_values = None
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(matrix.p)]
    if len(feature_names) != matrix.p:
        raise ParseError(1, 1, f"{len(feature_names)} names for {matrix.p} features")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(feature_names) + ([label_column] if label_values is not None else [])
        writer.writerow(header)
        for i in range(matrix.n):
            row = [
                repr(float(matrix.values[i, j])) if matrix.mask[i, j] else ""
                for j in range(matrix.p)
            ]
            if label_values is not None:
                row.append(label_values[i])
            writer.writerow(row)
