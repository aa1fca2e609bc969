"""Data model, CSV ingestion, validation and serialization for registry rows.

Raw strings are stored exactly as read; normalization is applied on demand
by the consuming modules so the original data is never destroyed. Datasets
are immutable values: transforms return new datasets, and no row is ever
dropped silently (malformed rows land in a rejects list on the dataset).
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field, fields as dc_fields
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterator, Sequence

from .errors import EncodingError, SchemaError

PERSON_HEADER = [
    "id", "first_name", "family_name", "father_name", "grandfather_name",
    "gender", "province", "district", "village", "high_school",
    "graduation_year", "score",
]
SCHOOL_HEADER = [
    "id", "first_name", "father_name", "province", "high_school",
    "graduation_year", "school_marks",
]

# Solar Hijri plausibility window for graduation years; configurable.
DEFAULT_YEAR_RANGE = (1350, 1450)


class Gender(enum.Enum):
    MALE = "M"
    FEMALE = "F"
    MISSING = ""

    @classmethod
    def from_cell(cls, cell: str) -> "Gender":
        return cls(cell.strip().upper())


@dataclass(frozen=True)
class PersonRecord:
    id: str
    first_name: str = ""
    family_name: str = ""
    father_name: str = ""
    grandfather_name: str = ""
    gender: Gender = Gender.MISSING
    province: str = ""
    district: str = ""
    village: str = ""
    high_school: str = ""
    graduation_year: int | None = None
    score: Decimal | None = None


@dataclass(frozen=True)
class SchoolRecord:
    id: str
    first_name: str = ""
    father_name: str = ""
    province: str = ""
    high_school: str = ""
    graduation_year: int | None = None
    school_marks: Decimal | None = None


@dataclass(frozen=True)
class RejectedRow:
    line: int          # 1-based line number in the source file (header = 1)
    reason: str
    raw: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    """Ordered, immutable collection of records plus load metadata."""

    records: tuple = ()
    source: str = ""
    rejects: tuple[RejectedRow, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def with_records(self, records: Sequence) -> "Dataset":
        return Dataset(records=tuple(records), source=self.source, rejects=self.rejects)


_SCHEMAS = {
    "person": (PersonRecord, PERSON_HEADER),
    "school": (SchoolRecord, SCHOOL_HEADER),
}


def _parse_year(cell: str) -> int | None:
    cell = cell.strip()
    if not cell:
        return None
    if not cell.isdigit():
        raise ValueError(cell)
    return int(cell)


def _parse_decimal(cell: str) -> Decimal | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return Decimal(cell)
    except InvalidOperation:
        raise ValueError(cell) from None


def load_csv(path: str | Path, schema: str) -> Dataset:
    """Load a UTF-8 CSV with header row into a Dataset.

    Blank cells become MISSING values. Rows that cannot be parsed (wrong
    width, empty id, bad gender code, non-numeric year or score) are
    collected in ``dataset.rejects`` with line number and reason; they are
    never silently dropped. A missing required header raises
    :class:`SchemaError`, non-UTF-8 input raises :class:`EncodingError`.
    """
    if schema not in _SCHEMAS:
        raise SchemaError(f"unknown schema {schema!r}; expected 'person' or 'school'")
    record_cls, header = _SCHEMAS[schema]
    try:
        with open(path, encoding="utf-8-sig", newline="") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path}: not valid UTF-8 ({exc})") from exc
    if not rows:
        raise SchemaError(f"{path}: empty file, expected header {header}")
    got = [h.strip() for h in rows[0]]
    missing = [h for h in header if h not in got]
    if missing:
        raise SchemaError(f"{path}: missing required header column(s) {missing}")
    col = {name: got.index(name) for name in header}
    width = len(got)

    records = []
    rejects = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            rejects.append(RejectedRow(lineno, f"expected {width} cells, got {len(row)}", tuple(row)))
            continue
        cell = {name: row[col[name]] for name in header}
        if not cell["id"].strip():
            rejects.append(RejectedRow(lineno, "empty id", tuple(row)))
            continue
        try:
            year = _parse_year(cell["graduation_year"])
        except ValueError:
            rejects.append(RejectedRow(lineno, f"bad graduation_year {cell['graduation_year']!r}", tuple(row)))
            continue
        if schema == "person":
            try:
                gender = Gender.from_cell(cell["gender"])
            except ValueError:
                rejects.append(RejectedRow(lineno, f"bad gender {cell['gender']!r}", tuple(row)))
                continue
            try:
                score = _parse_decimal(cell["score"])
            except ValueError:
                rejects.append(RejectedRow(lineno, f"bad score {cell['score']!r}", tuple(row)))
                continue
            records.append(PersonRecord(
                id=cell["id"],
                first_name=cell["first_name"],
                family_name=cell["family_name"],
                father_name=cell["father_name"],
                grandfather_name=cell["grandfather_name"],
                gender=gender,
                province=cell["province"],
                district=cell["district"],
                village=cell["village"],
                high_school=cell["high_school"],
                graduation_year=year,
                score=score,
            ))
        else:
            try:
                marks = _parse_decimal(cell["school_marks"])
            except ValueError:
                rejects.append(RejectedRow(lineno, f"bad school_marks {cell['school_marks']!r}", tuple(row)))
                continue
            records.append(SchoolRecord(
                id=cell["id"],
                first_name=cell["first_name"],
                father_name=cell["father_name"],
                province=cell["province"],
                high_school=cell["high_school"],
                graduation_year=year,
                school_marks=marks,
            ))
    return Dataset(records=tuple(records), source=str(path), rejects=tuple(rejects))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Gender):
        return value.value
    return str(value)


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV (RFC-4180 quoting, UTF-8, header row).

    Round-trip law: loading the written file yields the same records
    field-for-field.
    """
    if dataset.records and isinstance(dataset.records[0], SchoolRecord):
        header = SCHOOL_HEADER
    else:
        header = PERSON_HEADER
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in dataset.records:
            writer.writerow([_cell(getattr(rec, name)) for name in header])


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, Gender):
        return value is Gender.MISSING
    return value == ""


@dataclass(frozen=True)
class ValidationReport:
    total_rows: int
    duplicate_ids: dict[str, int]            # id -> occurrence count (>= 2)
    out_of_range_years: tuple[tuple[str, int], ...]   # (id, year)
    missingness: dict[str, int]              # field -> count of missing cells
    rejected_rows: int

    @property
    def is_clean(self) -> bool:
        return not self.duplicate_ids and not self.out_of_range_years and self.rejected_rows == 0

    def to_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "duplicate_ids": dict(self.duplicate_ids),
            "out_of_range_years": [list(t) for t in self.out_of_range_years],
            "missingness": dict(self.missingness),
            "rejected_rows": self.rejected_rows,
            "is_clean": self.is_clean,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("ensure_ascii", False)
        kwargs.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kwargs)


def validate(dataset: Dataset, year_range: tuple[int, int] = DEFAULT_YEAR_RANGE) -> ValidationReport:
    """Report duplicate ids, out-of-range years and per-field missingness."""
    seen: dict[str, int] = {}
    years = []
    missing: dict[str, int] = {}
    for rec in dataset.records:
        seen[rec.id] = seen.get(rec.id, 0) + 1
        if rec.graduation_year is not None and not (
            year_range[0] <= rec.graduation_year <= year_range[1]
        ):
            years.append((rec.id, rec.graduation_year))
        for f in dc_fields(rec):
            if f.name == "id":
                continue
            if _is_missing(getattr(rec, f.name)):
                missing[f.name] = missing.get(f.name, 0) + 1
    return ValidationReport(
        total_rows=len(dataset),
        duplicate_ids={k: v for k, v in seen.items() if v > 1},
        out_of_range_years=tuple(years),
        missingness=missing,
        rejected_rows=len(dataset.rejects),
    )
