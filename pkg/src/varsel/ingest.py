"""Dataset ingestion from headered delimiter-separated text.

Input contract: UTF-8, one header row, '.' decimal separator, every cell
numeric and finite.  Violations raise IngestError naming the offending
line and column.  Columns other than the target (and any explicitly
dropped columns) become features in file order, so the k-th remaining
column is feature k in every report.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, normalize_columns
from .errors import ConfigError, IngestError


def ingest_csv(
    path: str | Path,
    target_column: str,
    normalize: str = "none",
    delimiter: str = ",",
    drop_columns: Sequence[str] = (),
) -> Dataset:
    """Read a numeric table and split it into features and target."""
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file, expected a header row") from None
        header = [name.strip() for name in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise IngestError(f"{path}: duplicate header column(s) {dupes}")
        if target_column not in header:
            raise ConfigError(f"target column {target_column!r} not in header")
        missing = [c for c in drop_columns if c not in header]
        if missing:
            raise ConfigError(f"drop column(s) {missing} not in header")
        excluded = set(drop_columns) | {target_column}
        feature_names = [h for h in header if h not in excluded]
        target_pos = header.index(target_column)
        feature_pos = [header.index(h) for h in feature_names]

        rows = []
        targets = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate blank trailing lines
            if len(row) != len(header):
                raise IngestError(
                    f"{path}: line {line_no} has {len(row)} cells, "
                    f"expected {len(header)}"
                )
            parsed = []
            for pos, cell in enumerate(row):
                text = cell.strip()
                if text == "":
                    raise IngestError(
                        f"{path}: line {line_no}, column {header[pos]!r}: "
                        f"missing value"
                    )
                try:
                    value = float(text)
                except ValueError:
                    raise IngestError(
                        f"{path}: line {line_no}, column {header[pos]!r}: "
                        f"non-numeric cell {text!r}"
                    ) from None
                if not np.isfinite(value):
                    raise IngestError(
                        f"{path}: line {line_no}, column {header[pos]!r}: "
                        f"non-finite value {text!r}"
                    )
                parsed.append(value)
            rows.append([parsed[pos] for pos in feature_pos])
            targets.append(parsed[target_pos])

    if not rows:
        raise IngestError(f"{path}: no data rows after the header")
    features = normalize_columns(np.array(rows, dtype=float), normalize)
    return Dataset(
        features=features,
        target=np.array(targets, dtype=float),
        labels=tuple(feature_names),
        target_label=target_column,
    )


def write_dataset_csv(dataset: Dataset, path: str | Path, delimiter: str = ",") -> None:
    """Serialize a dataset so that re-ingestion is bit-identical.

    Floats are written with repr(), the shortest representation that parses
    back to the same double.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=delimiter, lineterminator="\n")
        writer.writerow(list(dataset.labels) + [dataset.target_label])
        for i in range(dataset.n_rows):
            row = [repr(float(v)) for v in dataset.features[i]]
            row.append(repr(float(dataset.target[i])))
            writer.writerow(row)
