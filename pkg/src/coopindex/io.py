"""Matrix files: headerless CSV, or JSON with labels and data-set sizes.

JSON layout::

    {"concepts": [...], "datasets": [...], "dataset_sizes": [...], "entries": [[...], ...]}

Floats are written with ``repr`` so a written matrix parses back exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO

import numpy as np
from numpy.typing import ArrayLike

from .core import CoopIndexError, LabeledMatrix, SpaceIndex


class MalformedInputError(CoopIndexError):
    """A matrix file could not be parsed."""


def guess_format(path: str | Path) -> str:
    return "json" if str(path).lower().endswith(".json") else "csv"


def parse_csv(text: str) -> LabeledMatrix:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            rows.append([float(cell) for cell in row])
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: {exc}") from None
    if not rows:
        raise MalformedInputError("CSV matrix is empty")
    if len({len(r) for r in rows}) != 1:
        raise MalformedInputError("CSV rows have differing lengths")
    return LabeledMatrix(np.array(rows))


def parse_json(text: str) -> LabeledMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or "entries" not in obj:
        raise MalformedInputError('JSON matrix needs an object with an "entries" field')
    try:
        entries = np.array(obj["entries"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad entries: {exc}") from None
    if entries.ndim != 2:
        raise MalformedInputError("entries must be a list of equal-length rows")
    n_d, n_h = entries.shape
    index = None
    if any(k in obj for k in ("concepts", "datasets", "dataset_sizes")):
        index = SpaceIndex(
            obj.get("concepts") or [f"h{j}" for j in range(n_h)],
            obj.get("datasets") or [f"d{i}" for i in range(n_d)],
            obj.get("dataset_sizes") or [1] * n_d,
        )
    return LabeledMatrix(entries, index)


def read_matrix(path: str | Path, fmt: str | None = None) -> LabeledMatrix:
    fmt = fmt or guess_format(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_json(text) if fmt == "json" else parse_csv(text)


def format_matrix(M: LabeledMatrix | ArrayLike, fmt: str = "csv") -> str:
    if not isinstance(M, LabeledMatrix):
        M = LabeledMatrix(M)
    A = M.entries
    if fmt == "json":
        index = M.index or SpaceIndex.default(*A.shape)
        obj = {
            "concepts": list(index.concept_labels),
            "datasets": list(index.dataset_labels),
            "dataset_sizes": list(index.dataset_sizes),
            "entries": A.tolist(),
        }
        return json.dumps(obj) + "\n"
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in A)


def write_matrix(M: LabeledMatrix | ArrayLike, fh: IO[str], fmt: str = "csv") -> None:
    fh.write(format_matrix(M, fmt))
