"""Tabular ingest, filtering, and grouping into measure-specific subsets.

A :class:`Dataset` is an immutable snapshot of a CSV (or generated) table.
Filtering produces lightweight views that reference the original rows by
``row_id``; grouping splits a view into the per-mark subsets that the fold
pipeline consumes.  Missing cells are stored as ``None`` and are excluded
per-metric downstream (each metric reports how many rows it dropped).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import IngestError, ValidationError

COLUMN_KINDS = ("number", "integer", "category", "boolean", "timestamp")

FILTER_OPS = ("eq", "neq", "lt", "lte", "gt", "gte", "in", "between")

_BOOL_TOKENS = {"true": True, "false": False, "True": True, "False": False,
                "TRUE": True, "FALSE": False}
# parsing under an explicit boolean hint is more permissive than inference
_BOOL_PARSE = dict(_BOOL_TOKENS, **{"1": True, "0": False})


@dataclass(frozen=True)
class Record:
    """One row: per-column values (``None`` marks a missing cell) plus the
    row id assigned at ingest.  Row ids are 0-based positions and are never
    reused."""
    row_id: int
    values: tuple


@dataclass
class Dataset:
    name: str
    schema: list[tuple[str, str]]          # (column name, kind)
    rows: list[list]                       # row-major; rows[i] has row_id i

    def __post_init__(self):
        seen = set()
        for col, kind in self.schema:
            if kind not in COLUMN_KINDS:
                raise ValidationError(f"unknown column kind {kind!r} for column {col!r}")
            if col in seen:
                raise ValidationError(f"duplicate column name {col!r}")
            seen.add(col)
        self._index = {col: i for i, (col, _) in enumerate(self.schema)}

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_index(self, column: str) -> int:
        try:
            return self._index[column]
        except KeyError:
            raise ValidationError(f"unknown column {column!r} in dataset {self.name!r}") from None

    def kind_of(self, column: str) -> str:
        return self.schema[self.column_index(column)][1]

    def record(self, row_id: int) -> Record:
        return Record(row_id=row_id, values=tuple(self.rows[row_id]))

    def values(self, column: str, row_ids: Iterable[int]) -> list:
        """Column values for the given rows, preserving order and duplicates
        (replacement-mode folds repeat row ids)."""
        idx = self.column_index(column)
        rows = self.rows
        return [rows[r][idx] for r in row_ids]

    def all_row_ids(self) -> list[int]:
        return list(range(len(self.rows)))

    def schema_dict(self) -> list[dict]:
        return [{"name": c, "kind": k} for c, k in self.schema]


@dataclass(frozen=True)
class FilterPredicate:
    """One conjunct of a filter: ``column <op> operand``.

    ``operand`` is a scalar for comparison ops, a list for ``in``, and a
    two-element ``[low, high]`` pair (inclusive) for ``between``.  Rows with
    a missing value in ``column`` never match.
    """
    column: str
    op: str
    operand: object

    def __post_init__(self):
        if self.op not in FILTER_OPS:
            raise ValidationError(f"unknown filter op {self.op!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "FilterPredicate":
        if not isinstance(d, dict) or "column" not in d or "op" not in d:
            raise ValidationError(f"filter must be an object with column/op/operand, got {d!r}")
        op = {"in-set": "in"}.get(d["op"], d["op"])
        return cls(column=d["column"], op=op, operand=d.get("operand"))

    def to_dict(self) -> dict:
        return {"column": self.column, "op": self.op, "operand": _plain(self.operand)}


@dataclass
class DatasetView:
    """Immutable row-id snapshot of a filtered dataset."""
    base: Dataset
    row_ids: list[int]
    filters: list[FilterPredicate] = field(default_factory=list)

    @property
    def row_count(self) -> int:
        return len(self.row_ids)


@dataclass
class MeasureSubset:
    """The rows behind one visual measure, keyed by its group-by values."""
    group_key: list[tuple[str, object]]    # empty for whole-view subsets
    member_row_ids: list[int]
    source_filter: list[FilterPredicate] = field(default_factory=list)

    @property
    def label(self) -> str:
        if not self.group_key:
            return "all"
        return ",".join(f"{c}={v}" for c, v in self.group_key)

    def group_key_dict(self) -> list[list]:
        return [[c, _plain(v)] for c, v in self.group_key]


def _plain(v):
    """JSON-safe rendering of a cell value."""
    if isinstance(v, datetime):
        return v.isoformat()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------

def _parse_cell(text: str, kind: str, column: str, line_no: int):
    if text == "":
        return None
    try:
        if kind == "number":
            return float(text)
        if kind == "integer":
            return int(text)
        if kind == "boolean":
            if text in _BOOL_PARSE:
                return _BOOL_PARSE[text]
            raise ValueError(text)
        if kind == "timestamp":
            return datetime.fromisoformat(text)
        return text  # category
    except ValueError:
        raise IngestError(
            f"line {line_no}: value {text!r} in column {column!r} is not a valid {kind}"
        ) from None


def _infer_kind(texts: list[str]) -> str:
    """Pick the narrowest kind that parses every non-empty cell."""
    nonempty = [t for t in texts if t != ""]
    if not nonempty:
        return "category"
    if all(t in _BOOL_TOKENS for t in nonempty):
        return "boolean"
    try:
        for t in nonempty:
            int(t)
        return "integer"
    except ValueError:
        pass
    try:
        for t in nonempty:
            float(t)
        return "number"
    except ValueError:
        pass
    return "category"


def _ingest_reader(reader, schema_hint: Optional[dict], name: str) -> Dataset:
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("line 1: file has no header row") from None
    raw_rows = []
    for line_no, cells in enumerate(reader, start=2):
        if not cells:
            continue  # blank line
        if len(cells) != len(header):
            raise IngestError(
                f"line {line_no}: expected {len(header)} cells, got {len(cells)}"
            )
        raw_rows.append((line_no, cells))

    schema_hint = schema_hint or {}
    for col, kind in schema_hint.items():
        if col not in header:
            raise ValidationError(f"schema hint names unknown column {col!r}")
        if kind not in COLUMN_KINDS:
            raise ValidationError(f"schema hint has unknown kind {kind!r} for {col!r}")

    schema: list[tuple[str, str]] = []
    for j, col in enumerate(header):
        if col in schema_hint:
            schema.append((col, schema_hint[col]))
        else:
            schema.append((col, _infer_kind([cells[j] for _, cells in raw_rows])))

    rows = []
    for line_no, cells in raw_rows:
        rows.append([
            _parse_cell(cells[j], schema[j][1], schema[j][0], line_no)
            for j in range(len(header))
        ])
    return Dataset(name=name, schema=schema, rows=rows)


def ingest_csv(path, schema_hint: Optional[dict] = None, name: Optional[str] = None) -> Dataset:
    """Read an RFC-4180 CSV (UTF-8, header row) into a Dataset.

    ``schema_hint`` maps column name to kind; unhinted columns get an
    inferred kind.  Empty cells become missing markers.  A row whose cell
    count does not match the header is an :class:`IngestError` naming the
    line; so is a value that fails to parse under a hinted kind.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return _ingest_reader(csv.reader(fh), schema_hint, name or path.stem)


def ingest_csv_text(text: str, schema_hint: Optional[dict] = None,
                    name: str = "upload") -> Dataset:
    """Ingest CSV content already in memory (uploads); same contract as
    :func:`ingest_csv`."""
    import io
    return _ingest_reader(csv.reader(io.StringIO(text)), schema_hint, name)


def load_schema_hint(path) -> dict:
    """Schema hint file: a JSON object mapping column name to kind."""
    with Path(path).open(encoding="utf-8") as fh:
        hint = json.load(fh)
    if not isinstance(hint, dict):
        raise ValidationError("schema hint file must contain a JSON object")
    return hint


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------

_KIND_TYPES = {
    "number": (int, float),
    "integer": (int,),
    "category": (str,),
    "boolean": (bool,),
    "timestamp": (datetime, str),
}


def _coerce_operand(value, kind: str, column: str):
    if kind == "timestamp" and isinstance(value, str):
        try:
            return datetime.fromisoformat(value)
        except ValueError:
            raise ValidationError(
                f"operand {value!r} for timestamp column {column!r} is not ISO-8601"
            ) from None
    if kind == "integer" and isinstance(value, bool):
        raise ValidationError(f"operand for integer column {column!r} must not be a boolean")
    if kind == "number" and isinstance(value, bool):
        raise ValidationError(f"operand for number column {column!r} must not be a boolean")
    if not isinstance(value, _KIND_TYPES[kind]):
        raise ValidationError(
            f"operand {value!r} does not match kind {kind!r} of column {column!r}"
        )
    return value


def validate_predicates(dataset: Dataset, predicates: Sequence[FilterPredicate]) -> list[FilterPredicate]:
    """Check columns and operand kinds; returns predicates with coerced operands."""
    checked = []
    for pred in predicates:
        kind = dataset.kind_of(pred.column)  # raises on unknown column
        if pred.op == "in":
            if not isinstance(pred.operand, (list, tuple, set)):
                raise ValidationError(f"'in' filter on {pred.column!r} needs a list operand")
            operand = [_coerce_operand(v, kind, pred.column) for v in pred.operand]
        elif pred.op == "between":
            if not isinstance(pred.operand, (list, tuple)) or len(pred.operand) != 2:
                raise ValidationError(
                    f"'between' filter on {pred.column!r} needs a [low, high] operand"
                )
            operand = [_coerce_operand(v, kind, pred.column) for v in pred.operand]
        else:
            operand = _coerce_operand(pred.operand, kind, pred.column)
        checked.append(FilterPredicate(pred.column, pred.op, operand))
    return checked


def _matches(value, pred: FilterPredicate) -> bool:
    if value is None:
        return False
    op, operand = pred.op, pred.operand
    if op == "eq":
        return value == operand
    if op == "neq":
        return value != operand
    if op == "lt":
        return value < operand
    if op == "lte":
        return value <= operand
    if op == "gt":
        return value > operand
    if op == "gte":
        return value >= operand
    if op == "in":
        return value in operand
    if op == "between":
        return operand[0] <= value <= operand[1]
    raise AssertionError(op)


def apply_filter(dataset: Dataset, predicates: Sequence[FilterPredicate]) -> DatasetView:
    """Rows satisfying the conjunction of all predicates, as a view that
    keeps the original row ids.  An empty predicate list selects everything.
    """
    checked = validate_predicates(dataset, predicates)
    if not checked:
        return DatasetView(base=dataset, row_ids=dataset.all_row_ids(), filters=[])
    col_idx = [(dataset.column_index(p.column), p) for p in checked]
    keep = []
    for rid, row in enumerate(dataset.rows):
        if all(_matches(row[idx], p) for idx, p in col_idx):
            keep.append(rid)
    return DatasetView(base=dataset, row_ids=keep, filters=checked)


# ---------------------------------------------------------------------------
# Grouping
# ---------------------------------------------------------------------------

_GROUPABLE = ("category", "boolean", "integer")


def group_measures(view: DatasetView, group_by: Sequence[str]) -> list[MeasureSubset]:
    """Split a view into one subset per distinct key combination.

    Group columns must be categorical, boolean, or integer (binning of
    continuous columns is out of scope).  Rows missing a group value form
    their own ``None``-keyed group so the subsets still partition the view.
    An empty ``group_by`` yields a single subset covering the view; an empty
    view yields no subsets.
    """
    base = view.base
    for col in group_by:
        kind = base.kind_of(col)
        if kind not in _GROUPABLE:
            raise ValidationError(
                f"cannot group by {col!r}: kind {kind!r} is continuous (binning unsupported)"
            )
    if not view.row_ids:
        return []
    if not group_by:
        return [MeasureSubset(group_key=[], member_row_ids=list(view.row_ids),
                              source_filter=list(view.filters))]
    idxs = [base.column_index(c) for c in group_by]
    groups: dict[tuple, list[int]] = {}
    for rid in view.row_ids:
        row = base.rows[rid]
        key = tuple(row[i] for i in idxs)
        groups.setdefault(key, []).append(rid)
    # deterministic order: missing keys first, then value order
    def sort_key(key):
        return tuple((v is None, v) for v in key)
    subsets = []
    for key in sorted(groups, key=sort_key):
        subsets.append(MeasureSubset(
            group_key=list(zip(group_by, key)),
            member_row_ids=groups[key],
            source_filter=list(view.filters),
        ))
    return subsets
