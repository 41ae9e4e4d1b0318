"""End-to-end analysis execution shared by the HTTP service and the CLI.

A request names a dataset, filters, an optional group-by, one metric, a
partition config, an aggregation spec, and a chart kind.  Execution is a
pure function of (dataset contents, request): seeds are part of the request,
so replaying a request reproduces the response exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .aggregate import AggregationSpec, MergedMeasure, aggregate
from .chartspec import (CHART_KINDS, ChartSpec, build_bar_chart,
                        build_bubble_chart, build_regression_chart)
from .dataset import (Dataset, FilterPredicate, MeasureSubset, apply_filter,
                      group_measures)
from .errors import ValidationError
from .metrics import MetricSpec, run_metrics
from .partition import FoldSet, PartitionConfig, run_partition

_DEFAULT_BAR_STATISTIC = {"count": "count", "proportion": "proportion",
                          "mean": "mean", "linear_regression": "slope",
                          "binary_association": "positive_support"}


@dataclass
class AnalysisRequest:
    dataset: str
    metric: MetricSpec
    partition: PartitionConfig
    chart_kind: str
    filters: list[FilterPredicate] = field(default_factory=list)
    group_by: list[str] = field(default_factory=list)
    aggregation: Optional[AggregationSpec] = None
    statistic: Optional[str] = None            # bar height override
    feature_columns: Optional[list[str]] = None  # bubble: one measure per feature

    def __post_init__(self):
        if self.chart_kind not in CHART_KINDS:
            raise ValidationError(f"unknown chart_kind {self.chart_kind!r}")
        if self.aggregation is None:
            self.aggregation = AggregationSpec.defaults_for(self.metric)
        if self.feature_columns is not None:
            if self.metric.kind != "binary_association":
                raise ValidationError("'features' requires the binary_association metric")
            if self.group_by:
                raise ValidationError("'features' cannot be combined with group_by")
            if not self.feature_columns:
                raise ValidationError("'features' must name at least one column")

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisRequest":
        if not isinstance(d, dict):
            raise ValidationError("analysis request must be an object")
        known = {"dataset", "filters", "group_by", "metric", "partition",
                 "aggregation", "chart_kind", "statistic"}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown request keys: {sorted(unknown)}")
        for key in ("dataset", "metric", "partition", "chart_kind"):
            if key not in d:
                raise ValidationError(f"request is missing {key!r}")
        metric_dict = dict(d["metric"])
        feature_columns = None
        if metric_dict.get("kind") == "binary_association" and "features" in metric_dict:
            feature_columns = list(metric_dict.pop("features"))
            metric_dict.setdefault("feature", feature_columns[0] if feature_columns else None)
        metric = MetricSpec.from_dict(metric_dict)
        return cls(
            dataset=d["dataset"],
            filters=[FilterPredicate.from_dict(f) for f in d.get("filters", [])],
            group_by=list(d.get("group_by", [])),
            metric=metric,
            partition=PartitionConfig.from_dict(d["partition"]),
            aggregation=AggregationSpec.from_dict(d.get("aggregation"), metric),
            chart_kind=d["chart_kind"],
            statistic=d.get("statistic"),
            feature_columns=feature_columns,
        )

    def to_dict(self) -> dict:
        metric = self.metric.to_dict()
        if self.feature_columns is not None:
            metric["features"] = list(self.feature_columns)
        out = {
            "dataset": self.dataset,
            "filters": [f.to_dict() for f in self.filters],
            "group_by": list(self.group_by),
            "metric": metric,
            "partition": self.partition.to_dict(),
            "aggregation": self.aggregation.to_dict(),
            "chart_kind": self.chart_kind,
        }
        if self.statistic is not None:
            out["statistic"] = self.statistic
        return out


@dataclass
class AnalysisResult:
    chart: ChartSpec
    measures: list[MergedMeasure]
    warnings: list[dict]

    @property
    def all_undefined(self) -> bool:
        """True when no measure produced any defined aggregate value."""
        for m in self.measures:
            if any(v is not None for v in m.aggregates.values()):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "chart": self.chart.to_dict(),
            "measures": [m.to_dict() for m in self.measures],
            "warnings": self.warnings,
        }


def canonical_json(obj) -> bytes:
    """Stable byte encoding: sorted keys, no whitespace.  Responses built
    through this function are byte-identical whenever the underlying values
    are equal, which is what makes replay comparisons meaningful."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _measure_warnings(measure: MergedMeasure, fold_set: FoldSet,
                      n_requested: int) -> list[dict]:
    warnings = []
    if fold_set.n_effective < n_requested:
        warnings.append({
            "kind": "degraded_fold_count",
            "measure": measure.label,
            "n_effective": fold_set.n_effective,
            "n_requested": n_requested,
            "message": (f"measure {measure.label!r}: only {fold_set.n_effective} of "
                        f"{n_requested} requested folds could be formed"),
        })
    undefined = sorted(name for name, v in measure.aggregates.items()
                       if v is None and name in measure.reasons
                       and measure.reasons[name] != "not aggregated; see per-fold values")
    if undefined:
        warnings.append({
            "kind": "undefined_statistics",
            "measure": measure.label,
            "statistics": undefined,
            "message": f"measure {measure.label!r}: undefined aggregates {undefined}",
        })
    flagged = sorted({flag for fs in measure.fold_stats for flag in fs.flags})
    if flagged:
        warnings.append({
            "kind": "fold_flags",
            "measure": measure.label,
            "flags": flagged,
            "message": f"measure {measure.label!r}: fold-level flags {flagged}",
        })
    return warnings


def _regression_points(dataset: Dataset, subset: MeasureSubset,
                       metric: MetricSpec) -> list[tuple]:
    xs = dataset.values(metric.x, subset.member_row_ids)
    ys = dataset.values(metric.y, subset.member_row_ids)
    return [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]


def compute_measures(dataset: Dataset, request: AnalysisRequest,
                     subsets: Sequence[MeasureSubset]):
    """Partition, measure, and aggregate each subset; returns the merged
    measures plus their warnings and (for regression charts) raw points."""
    measures: list[MergedMeasure] = []
    warnings: list[dict] = []
    points: list[tuple] = []
    provenance_base = {"partition": request.partition.to_dict()}
    for subset in subsets:
        fold_set = run_partition(subset, request.partition)
        if request.feature_columns is not None:
            specs = [(feat, MetricSpec.from_dict({**request.metric.to_dict(),
                                                  "feature": feat}))
                     for feat in request.feature_columns]
        else:
            specs = [(None, request.metric)]
        for feature_name, metric in specs:
            fold_stats = run_metrics(fold_set, metric, dataset)
            group_key = list(subset.group_key)
            if feature_name is not None:
                group_key = group_key + [("feature", feature_name)]
            measure = aggregate(
                fold_stats, request.aggregation,
                group_key=group_key,
                provenance={**provenance_base, "metric": metric.to_dict()},
            )
            measures.append(measure)
            warnings.extend(_measure_warnings(measure, fold_set,
                                              request.partition.n_requested))
        if request.chart_kind == "scatter_regression":
            points = _regression_points(dataset, subset, request.metric)
    return measures, warnings, points


def build_chart(request: AnalysisRequest, measures: Sequence[MergedMeasure],
                points: Sequence[tuple]) -> ChartSpec:
    provenance = request.to_dict()
    if request.chart_kind == "bar":
        statistic = request.statistic or _DEFAULT_BAR_STATISTIC[request.metric.kind]
        return build_bar_chart(measures, statistic, provenance=provenance)
    if request.chart_kind == "scatter_regression":
        if request.metric.kind != "linear_regression":
            raise ValidationError("scatter_regression chart needs the linear_regression metric")
        if len(measures) != 1:
            raise ValidationError("scatter_regression chart supports a single measure; "
                                  "drop group_by or use a bar chart")
        return build_regression_chart(measures[0], points, provenance=provenance)
    if request.chart_kind == "bubble":
        if request.metric.kind != "binary_association":
            raise ValidationError("bubble chart needs the binary_association metric")
        return build_bubble_chart(measures, provenance=provenance)
    raise ValidationError(f"unknown chart_kind {request.chart_kind!r}")  # pragma: no cover


def run_analysis(dataset: Dataset, request: AnalysisRequest) -> AnalysisResult:
    """filter -> group -> partition -> metrics -> aggregate -> chart."""
    request.metric.validate(dataset)
    view = apply_filter(dataset, request.filters)
    subsets = group_measures(view, request.group_by)
    if not subsets:
        warnings = [{"kind": "empty_selection",
                     "message": "no rows match the filters"}]
        chart = ChartSpec(chart_kind=request.chart_kind, marks=[],
                          axes={}, provenance=request.to_dict())
        return AnalysisResult(chart=chart, measures=[], warnings=warnings)
    measures, warnings, points = compute_measures(dataset, request, subsets)
    chart = build_chart(request, measures, points)
    return AnalysisResult(chart=chart, measures=measures, warnings=warnings)
