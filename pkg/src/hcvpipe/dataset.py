"""HCV laboratory CSV ingestion.

The expected schema is the published blood-donor laboratory file: an
optional unnamed id column, a five-valued Category column, Age, Sex
('m'/'f') and ten lab measurements. Empty cells and "NA" are missing
values. Anything outside that schema is a loud parse error; silent
coercion hides schema drift.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

LAB_COLUMNS = ("ALB", "ALP", "ALT", "AST", "BIL", "CHE", "CHOL", "CREA", "GGT", "PROT")
FEATURE_COLUMNS = ("Age", "Sex") + LAB_COLUMNS
_ID_HEADERS = {"", "id", "Id", "ID", "X", "Unnamed: 0"}
_MISSING_TOKENS = {"", "NA"}


class Category(enum.Enum):
    BLOOD_DONOR = "0=Blood Donor"
    SUSPECT_BLOOD_DONOR = "0s=suspect Blood Donor"
    HEPATITIS = "1=Hepatitis"
    FIBROSIS = "2=Fibrosis"
    CIRRHOSIS = "3=Cirrhosis"

    @classmethod
    def from_source(cls, text: str) -> "Category":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown category string: {text!r}")


class ParseError(ValueError):
    """CSV cell or structure failed validation; carries row/column context."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column


@dataclass
class RawRecord:
    """One parsed data row; lab fields are None when the cell was missing."""

    id: int
    category: Category
    age: int
    sex: str  # 'm' or 'f'
    labs: dict[str, float | None] = field(default_factory=dict)

    def __post_init__(self):
        if self.age <= 0:
            raise ValueError(f"age must be positive, got {self.age}")
        if self.sex not in ("m", "f"):
            raise ValueError(f"sex must be 'm' or 'f', got {self.sex!r}")
        for name, value in self.labs.items():
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"lab {name} must be finite and >= 0, got {value}")


@dataclass
class FeatureTable:
    """Numeric feature matrix with missingness mask and binary labels.

    values holds NaN exactly where missing is True; observed cells carry
    the float parsed bit-exactly from the CSV text. ids are reporting
    metadata only and never enter any model.
    """

    columns: tuple[str, ...]
    values: np.ndarray
    missing: np.ndarray
    labels: np.ndarray
    ids: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


@dataclass
class ColumnMissingness:
    column: str
    missing_count: int
    observed_mean: float
    observed_min: float
    observed_max: float


def parse_csv(path) -> list[RawRecord]:
    """Parse the laboratory CSV into one RawRecord per data row.

    Requires a header row naming Category, Age, Sex and the ten labs; a
    leading id column is optional. Raises ParseError with row/column
    context on unreadable structure, unknown category strings, or
    non-numeric cells.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file has no header row") from None
        header = [h.strip() for h in header]
        has_id = bool(header) and header[0] in _ID_HEADERS and header[0] not in ("Category",)
        required = ("Category", "Age", "Sex") + LAB_COLUMNS
        pos = {}
        for name in required:
            try:
                pos[name] = header.index(name)
            except ValueError:
                raise ParseError(f"missing required column {name!r} in header") from None
        id_pos = 0 if has_id else None

        records = []
        for row_idx, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, found {len(row)}", row=row_idx
                )
            try:
                category = Category.from_source(row[pos["Category"]].strip())
            except ValueError as exc:
                raise ParseError(str(exc), row=row_idx, column="Category") from exc
            age_text = row[pos["Age"]].strip()
            try:
                age = int(age_text)
            except ValueError:
                raise ParseError(
                    f"non-integer age {age_text!r}", row=row_idx, column="Age"
                ) from None
            sex = row[pos["Sex"]].strip()
            labs: dict[str, float | None] = {}
            for name in LAB_COLUMNS:
                cell = row[pos[name]].strip()
                if cell in _MISSING_TOKENS:
                    labs[name] = None
                    continue
                try:
                    labs[name] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {cell!r}", row=row_idx, column=name
                    ) from None
            if id_pos is not None:
                id_text = row[id_pos].strip()
                try:
                    rec_id = int(id_text)
                except ValueError:
                    raise ParseError(
                        f"non-integer id {id_text!r}", row=row_idx, column=header[0] or "id"
                    ) from None
            else:
                rec_id = row_idx - 1
            try:
                records.append(RawRecord(rec_id, category, age, sex, labs))
            except ValueError as exc:
                raise ParseError(str(exc), row=row_idx) from exc
    return records


def binarize_target(category: Category) -> int:
    """Blood donors (including suspect donors) -> 0, any liver-disease
    category -> 1."""
    if category in (Category.BLOOD_DONOR, Category.SUSPECT_BLOOD_DONOR):
        return 0
    return 1


def to_feature_table(records) -> FeatureTable:
    """Assemble records into a FeatureTable: Sex encoded male->1 female->0,
    mask true exactly where a lab cell was absent."""
    records = list(records)
    if not records:
        raise ValueError("to_feature_table needs at least one record")
    n = len(records)
    p = len(FEATURE_COLUMNS)
    values = np.zeros((n, p))
    missing = np.zeros((n, p), dtype=bool)
    labels = np.zeros(n, dtype=np.int64)
    ids = np.zeros(n, dtype=np.int64)
    for i, rec in enumerate(records):
        values[i, 0] = float(rec.age)
        values[i, 1] = 1.0 if rec.sex == "m" else 0.0
        for j, name in enumerate(LAB_COLUMNS, start=2):
            v = rec.labs.get(name)
            if v is None:
                values[i, j] = np.nan
                missing[i, j] = True
            else:
                values[i, j] = v
        labels[i] = binarize_target(rec.category)
        ids[i] = rec.id
    return FeatureTable(FEATURE_COLUMNS, values, missing, labels, ids)


def completed_table(table: FeatureTable, completed_values: np.ndarray) -> FeatureTable:
    """Wrap an imputed matrix back into a FeatureTable with an all-false mask."""
    completed_values = np.asarray(completed_values, dtype=np.float64)
    if completed_values.shape != table.values.shape:
        raise ValueError("completed matrix shape does not match table")
    return FeatureTable(
        table.columns,
        completed_values.copy(),
        np.zeros_like(table.missing),
        table.labels.copy(),
        table.ids.copy(),
    )


def missingness_report(table: FeatureTable) -> list[ColumnMissingness]:
    """Per-column missing count plus observed mean/min/max (NaN when a
    column has no observed cells)."""
    report = []
    for j, name in enumerate(table.columns):
        mask = table.missing[:, j]
        observed = table.values[~mask, j]
        if observed.size:
            mean = float(observed.sum() / observed.size)
            lo, hi = float(observed.min()), float(observed.max())
        else:
            mean = lo = hi = float("nan")
        report.append(ColumnMissingness(name, int(mask.sum()), mean, lo, hi))
    return report
