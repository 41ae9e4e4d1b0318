"""Per-fold statistics: the metric function applied independently to folds.

Every metric returns a fixed set of named outputs.  A statistic that cannot
be computed inside a fold (empty fold, constant column, single outcome
class) becomes an undefined marker (``None``) with a reason string rather
than an error: small degenerate folds are an expected condition of the
replicated pipeline, not a fault.

Supported metrics and their output names:

========================  =====================================================
count                     count
proportion                proportion, complement
mean                      mean
linear_regression         slope, intercept, r2
binary_association        positive_support, negative_support, odds_ratio,
                          odds_ratio_uncorrected, phi, p_value, significant
========================  =====================================================

The association p-value is the Pearson chi-square statistic with one degree
of freedom on the uncorrected 2x2 table, evaluated through the exact tail
identity ``p = erfc(sqrt(x / 2))``.  The odds ratio applies the
Haldane-Anscombe +0.5 correction to all four cells whenever any cell is
zero; the uncorrected value is emitted alongside (undefined if division by
zero).  Tables with any expected cell below 5 are flagged, not silently
switched to a different test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dataset import Dataset, DatasetView
from .errors import ValidationError
from .partition import FoldSet

METRIC_KINDS = ("count", "proportion", "mean", "linear_regression", "binary_association")

OUTPUT_NAMES = {
    "count": ("count",),
    "proportion": ("proportion", "complement"),
    "mean": ("mean",),
    "linear_regression": ("slope", "intercept", "r2"),
    "binary_association": ("positive_support", "negative_support", "odds_ratio",
                           "odds_ratio_uncorrected", "phi", "p_value", "significant"),
}

SMALL_EXPECTED_CELLS = "small_expected_cells"

# smallest positive double; keeps p_value in (0, 1] even when erfc underflows
_TINY = 5e-324


@dataclass(frozen=True)
class MetricSpec:
    """Which statistic set to compute, and on which columns."""
    kind: str
    column: Optional[str] = None          # proportion / mean target
    value: object = None                  # proportion target value
    x: Optional[str] = None               # regression
    y: Optional[str] = None
    feature: Optional[str] = None         # association
    outcome: Optional[str] = None
    alpha: float = 0.05

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if not (0.0 < self.alpha < 1.0):
            raise ValidationError("alpha must be in (0, 1)")

    def output_names(self) -> tuple[str, ...]:
        return OUTPUT_NAMES[self.kind]

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValidationError("metric must be an object with a 'kind'")
        kind = d["kind"]
        if kind == "proportion" and "value" not in d:
            raise ValidationError("proportion metric needs a target 'value'")
        return cls(
            kind=kind,
            column=d.get("column"),
            value=d.get("value"),
            x=d.get("x"),
            y=d.get("y"),
            feature=d.get("feature"),
            outcome=d.get("outcome"),
            alpha=d.get("alpha", 0.05),
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for key in ("column", "value", "x", "y", "feature", "outcome"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        if self.kind == "binary_association":
            out["alpha"] = self.alpha
        return out

    def validate(self, dataset: Dataset) -> None:
        """Check referenced columns exist with compatible kinds; raised
        before any fold is touched."""
        if self.kind == "count":
            return
        if self.kind == "proportion":
            kind = dataset.kind_of(self._need("column"))
            if kind not in ("category", "boolean", "integer"):
                raise ValidationError(
                    f"proportion target {self.column!r} must be categorical, got {kind!r}")
        elif self.kind == "mean":
            kind = dataset.kind_of(self._need("column"))
            if kind not in ("number", "integer"):
                raise ValidationError(f"mean needs a numeric column, got {kind!r}")
        elif self.kind == "linear_regression":
            for col in (self._need("x"), self._need("y")):
                kind = dataset.kind_of(col)
                if kind not in ("number", "integer"):
                    raise ValidationError(
                        f"regression column {col!r} must be numeric, got {kind!r}")
        elif self.kind == "binary_association":
            for col in (self._need("feature"), self._need("outcome")):
                _check_binary(dataset, col)

    def _need(self, attr: str) -> str:
        v = getattr(self, attr)
        if v is None:
            raise ValidationError(f"{self.kind} metric needs {attr!r}")
        return v


def _check_binary(dataset: Dataset, column: str) -> None:
    kind = dataset.kind_of(column)
    if kind == "boolean":
        return
    if kind == "integer":
        idx = dataset.column_index(column)
        for row in dataset.rows:
            v = row[idx]
            if v is not None and v not in (0, 1):
                raise ValidationError(
                    f"column {column!r} must be binary; found value {v!r}")
        return
    raise ValidationError(
        f"column {column!r} must be boolean or 0/1 integer, got kind {kind!r}")


@dataclass
class FoldStats:
    """The statistics computed on one fold.

    ``values`` always contains every output name of the metric; undefined
    outputs are ``None`` with an explanation in ``reasons``.  ``support_n``
    counts the rows actually used after per-metric missing-value removal.
    """
    fold_index: int
    values: dict
    support_n: int
    missing_n: int = 0
    reasons: dict = field(default_factory=dict)
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "fold": self.fold_index,
            "values": dict(self.values),
            "support_n": self.support_n,
            "missing_n": self.missing_n,
            "reasons": dict(self.reasons),
            "flags": list(self.flags),
        }


# ---------------------------------------------------------------------------
# Individual metrics.  Each takes the fold's extracted column values (with
# None for missing cells) and returns (values, reasons, support_n, flags).
# ---------------------------------------------------------------------------

def metric_count(member_row_ids: Sequence[int]):
    """Multiset cardinality of the fold; duplicates from replacement-mode
    folds each count."""
    n = len(member_row_ids)
    return {"count": n}, {}, n, ()


def metric_proportion(values: Sequence, target) -> tuple:
    usable = [v for v in values if v is not None]
    if not usable:
        reasons = {"proportion": "no usable values", "complement": "no usable values"}
        return {"proportion": None, "complement": None}, reasons, 0, ()
    matches = sum(1 for v in usable if v == target)
    p = matches / len(usable)
    # complement computed as 1 - p (not (u - m)/u) so p + complement == 1.0
    # holds bit-exactly
    return {"proportion": p, "complement": 1.0 - p}, {}, len(usable), ()


def metric_mean(values: Sequence) -> tuple:
    usable = [v for v in values if v is not None]
    if not usable:
        return {"mean": None}, {"mean": "no usable values"}, 0, ()
    return {"mean": math.fsum(usable) / len(usable)}, {}, len(usable), ()


def metric_linear_regression(xs: Sequence, ys: Sequence) -> tuple:
    """Ordinary least squares of y on x, minimizing squared y-residuals."""
    pairs = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]
    undefined = {"slope": None, "intercept": None, "r2": None}
    if len(pairs) < 2:
        reason = "insufficient points"
        return undefined, {k: reason for k in undefined}, len(pairs), ()
    n = len(pairs)
    mean_x = math.fsum(x for x, _ in pairs) / n
    mean_y = math.fsum(y for _, y in pairs) / n
    sxx = math.fsum((x - mean_x) * (x - mean_x) for x, _ in pairs)
    sxy = math.fsum((x - mean_x) * (y - mean_y) for x, y in pairs)
    if sxx == 0.0:
        reason = "zero variance in x"
        return undefined, {k: reason for k in undefined}, n, ()
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_tot = math.fsum((y - mean_y) ** 2 for _, y in pairs)
    ss_res = math.fsum((y - (slope * x + intercept)) ** 2 for x, y in pairs)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": slope, "intercept": intercept, "r2": r2}, {}, n, ()


def chi_square_stat(a: float, b: float, c: float, d: float) -> float:
    """Pearson chi-square of a 2x2 table, no continuity correction."""
    n = a + b + c + d
    den = (a + b) * (c + d) * (a + c) * (b + d)
    if den == 0:
        return 0.0
    return n * (a * d - b * c) ** 2 / den


def chi_square_p_value(stat: float) -> float:
    """Upper tail of chi-square with 1 dof; exact via erfc, clamped so the
    result stays strictly positive."""
    p = math.erfc(math.sqrt(stat / 2.0))
    return p if p > 0.0 else _TINY


def metric_binary_association(features: Sequence, outcomes: Sequence,
                              alpha: float = 0.05) -> tuple:
    """Association of a binary feature with a binary outcome from the fold's
    2x2 table.

    Cell layout: over good-outcome rows a = feature present, b = absent;
    over bad-outcome rows c = present, d = absent.  positive_support is
    a/(a+b), negative_support c/(c+d); phi is the Pearson correlation of the
    two indicators; ``significant`` is the categorical label
    ``p_value < alpha``.
    """
    a = b = c = d = 0
    for f, o in zip(features, outcomes):
        if f is None or o is None:
            continue
        if bool(o):
            if bool(f):
                a += 1
            else:
                b += 1
        else:
            if bool(f):
                c += 1
            else:
                d += 1
    n = a + b + c + d
    values = {name: None for name in OUTPUT_NAMES["binary_association"]}
    reasons: dict = {}
    flags: tuple = ()
    if n == 0:
        for name in values:
            reasons[name] = "no usable rows"
        return values, reasons, 0, flags

    if a + b > 0:
        values["positive_support"] = a / (a + b)
    else:
        reasons["positive_support"] = "no good-outcome rows"
    if c + d > 0:
        values["negative_support"] = c / (c + d)
    else:
        reasons["negative_support"] = "no bad-outcome rows"

    if b * c > 0:
        values["odds_ratio_uncorrected"] = (a * d) / (b * c)
    else:
        reasons["odds_ratio_uncorrected"] = "zero cell in table"
    if min(a, b, c, d) == 0:
        values["odds_ratio"] = ((a + 0.5) * (d + 0.5)) / ((b + 0.5) * (c + 0.5))
    else:
        values["odds_ratio"] = (a * d) / (b * c)

    den = (a + b) * (c + d) * (a + c) * (b + d)
    if den == 0:
        reason = ("only one outcome class in fold" if (a + b == 0 or c + d == 0)
                  else "only one feature class in fold")
        for name in ("phi", "p_value", "significant"):
            reasons[name] = reason
    else:
        values["phi"] = (a * d - b * c) / math.sqrt(den)
        p = chi_square_p_value(chi_square_stat(a, b, c, d))
        values["p_value"] = p
        values["significant"] = p < alpha
        expected_min = min((a + b) * (a + c), (a + b) * (b + d),
                           (c + d) * (a + c), (c + d) * (b + d)) / n
        if expected_min < 5:
            flags = (SMALL_EXPECTED_CELLS,)
    return values, reasons, n, flags


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _dataset_of(view) -> Dataset:
    return view.base if isinstance(view, DatasetView) else view


def compute_fold(spec: MetricSpec, dataset: Dataset, member_row_ids: Sequence[int],
                 fold_index: int = 0) -> FoldStats:
    """Run one metric on one fold's members."""
    if spec.kind == "count":
        values, reasons, support, flags = metric_count(member_row_ids)
    elif spec.kind == "proportion":
        values, reasons, support, flags = metric_proportion(
            dataset.values(spec.column, member_row_ids), spec.value)
    elif spec.kind == "mean":
        values, reasons, support, flags = metric_mean(
            dataset.values(spec.column, member_row_ids))
    elif spec.kind == "linear_regression":
        values, reasons, support, flags = metric_linear_regression(
            dataset.values(spec.x, member_row_ids),
            dataset.values(spec.y, member_row_ids))
    elif spec.kind == "binary_association":
        values, reasons, support, flags = metric_binary_association(
            dataset.values(spec.feature, member_row_ids),
            dataset.values(spec.outcome, member_row_ids),
            spec.alpha)
    else:  # pragma: no cover - guarded by MetricSpec validation
        raise ValidationError(f"unknown metric kind {spec.kind!r}")
    return FoldStats(
        fold_index=fold_index,
        values=values,
        support_n=support,
        missing_n=len(member_row_ids) - support,
        reasons=reasons,
        flags=flags,
    )


def run_metrics(fold_set: FoldSet, spec: MetricSpec, view) -> list[FoldStats]:
    """One FoldStats per fold, in fold-index order.

    Folds are computed independently (no shared accumulation), so the result
    for fold j is the same whether or not the other folds exist.  Spec
    validation happens once, before any fold runs.
    """
    dataset = _dataset_of(view)
    spec.validate(dataset)
    return [
        compute_fold(spec, dataset, fold.member_row_ids, fold.index)
        for fold in fold_set.folds
    ]
