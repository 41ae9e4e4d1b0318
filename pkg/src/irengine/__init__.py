"""Fold-replicated analytics engine.

Derived measures are computed independently on multiple folds of their
underlying rows, merged into a single aggregate for display, and kept
unfoldable so the per-fold variation stays one interaction away.
"""

__version__ = "0.1.0"

from .aggregate import AggregationSpec, MergedMeasure, aggregate, vote_tally
from .analysis import AnalysisRequest, AnalysisResult, canonical_json, run_analysis
from .chartspec import ChartSpec, build_bar_chart, build_bubble_chart, \
    build_regression_chart, convex_hull
from .dataset import (Dataset, DatasetView, FilterPredicate, MeasureSubset,
                      Record, apply_filter, group_measures, ingest_csv,
                      ingest_csv_text)
from .errors import IngestError, ValidationError
from .metrics import FoldStats, MetricSpec, run_metrics
from .partition import (Fold, FoldSet, IncrementalPartitioner, PartitionConfig,
                        partition, partition_partial, partition_with_replacement,
                        run_partition)
from .synth import GeneratorSpec, generate

__all__ = [
    "AggregationSpec", "AnalysisRequest", "AnalysisResult", "ChartSpec",
    "Dataset", "DatasetView", "FilterPredicate", "Fold", "FoldSet",
    "FoldStats", "GeneratorSpec", "IncrementalPartitioner", "IngestError",
    "MeasureSubset", "MergedMeasure", "MetricSpec", "PartitionConfig",
    "Record", "ValidationError", "aggregate", "apply_filter",
    "build_bar_chart", "build_bubble_chart", "build_regression_chart",
    "canonical_json", "convex_hull", "generate", "group_measures",
    "ingest_csv", "ingest_csv_text", "partition", "partition_partial",
    "partition_with_replacement", "run_analysis", "run_metrics",
    "run_partition", "vote_tally",
]
