"""Merging per-fold statistics into one aggregate value per statistic.

Numeric statistics merge via sum, unweighted mean, or a support-weighted
mean; categorical statistics merge via strict majority vote.  The per-fold
detail is always retained in the merged measure so a rendered aggregate can
be unfolded without recomputation.

Voting is deliberately conservative:

* a label wins only when strictly more than half of *all* folds carry it;
  ties on even fold counts resolve to the default label;
* folds whose statistic is undefined never vote, but they still count in
  the denominator, so a measure cannot become significant because most of
  its folds failed to compute.

P-values are never averaged (an averaged p-value has no sound
interpretation); the thresholded ``significant`` label is voted on instead
and the raw per-fold p-values stay visible in the fold detail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import ValidationError
from .metrics import FoldStats, MetricSpec

STRATEGIES = ("sum", "mean", "weighted_mean", "majority_vote", "none")

DEFAULT_STRATEGIES = {
    "count": "sum",
    "proportion": "weighted_mean",
    "complement": "weighted_mean",
    "mean": "weighted_mean",
    "slope": "weighted_mean",
    "intercept": "weighted_mean",
    "r2": "weighted_mean",
    "positive_support": "weighted_mean",
    "negative_support": "weighted_mean",
    "odds_ratio": "weighted_mean",
    "odds_ratio_uncorrected": "weighted_mean",
    "phi": "weighted_mean",
    "p_value": "none",
    "significant": "majority_vote",
}


@dataclass(frozen=True)
class AggregationSpec:
    """Strategy per statistic name, plus the fallback label used when a vote
    has no strict majority (False for boolean statistics)."""
    strategies: Mapping[str, str]
    vote_defaults: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name, strategy in self.strategies.items():
            if strategy not in STRATEGIES:
                raise ValidationError(f"unknown aggregation strategy {strategy!r} for {name!r}")

    @classmethod
    def defaults_for(cls, metric: MetricSpec) -> "AggregationSpec":
        return cls(strategies={name: DEFAULT_STRATEGIES[name]
                               for name in metric.output_names()})

    @classmethod
    def from_dict(cls, d, metric: MetricSpec) -> "AggregationSpec":
        if d is None or d == "defaults":
            return cls.defaults_for(metric)
        if not isinstance(d, dict):
            raise ValidationError("aggregation must be \"defaults\" or an object")
        strategies = dict(cls.defaults_for(metric).strategies)
        overrides = d.get("strategies", d)
        if not isinstance(overrides, dict):
            raise ValidationError("aggregation strategies must be an object")
        for name, strategy in overrides.items():
            if name == "vote_defaults":
                continue
            if name not in strategies:
                raise ValidationError(f"strategy names unknown statistic {name!r}")
            strategies[name] = strategy
        return cls(strategies=strategies, vote_defaults=d.get("vote_defaults", {}))

    def to_dict(self) -> dict:
        out = {"strategies": dict(self.strategies)}
        if self.vote_defaults:
            out["vote_defaults"] = dict(self.vote_defaults)
        return out


@dataclass
class MergedMeasure:
    """Aggregates plus the retained fold detail for one visual measure."""
    group_key: list
    aggregates: dict
    fold_stats: list[FoldStats]
    n_effective: int
    vote_detail: dict
    provenance: dict
    reasons: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.group_key:
            return "all"
        return ",".join(f"{c}={v}" for c, v in self.group_key)

    def to_dict(self) -> dict:
        return {
            "group_key": [[c, v] for c, v in self.group_key],
            "aggregates": dict(self.aggregates),
            "folds": [fs.to_dict() for fs in self.fold_stats],
            "n_effective": self.n_effective,
            "vote_detail": self.vote_detail,
            "reasons": dict(self.reasons),
            "provenance": self.provenance,
        }


def vote_tally(fold_stats: Sequence[FoldStats], statistic: str,
               n_effective: Optional[int] = None) -> dict:
    """Per-label fold counts for a categorical statistic, with the three
    nested flags for boolean labels: unanimous requires every fold defined
    and true, majority requires strictly more than half of all folds, and
    at_least_one requires a single true fold."""
    if n_effective is None:
        n_effective = len(fold_stats)
    counts: dict = {}
    defined = 0
    for fs in fold_stats:
        label = fs.values.get(statistic)
        if label is None:
            continue
        defined += 1
        key = _label_key(label)
        counts[key] = counts.get(key, 0) + 1
    detail = {"counts": counts, "defined": defined, "n_effective": n_effective}
    true_count = counts.get("true", 0)
    detail["unanimous"] = defined == n_effective and true_count == n_effective and n_effective > 0
    detail["majority"] = true_count * 2 > n_effective
    detail["at_least_one"] = true_count >= 1
    return detail


def _label_key(label) -> str:
    if isinstance(label, bool):
        return "true" if label else "false"
    return str(label)


def _majority_vote(fold_stats, statistic, n_effective, default):
    counts: dict = {}
    for fs in fold_stats:
        label = fs.values.get(statistic)
        if label is None:
            continue
        counts[label] = counts.get(label, 0) + 1
    for label, count in counts.items():
        if count * 2 > n_effective:
            return label
    return default


def aggregate(fold_stats: Sequence[FoldStats], spec: AggregationSpec,
              group_key: Optional[list] = None,
              provenance: Optional[dict] = None) -> MergedMeasure:
    """Merge the fold statistics into one aggregate value per statistic.

    * ``sum``: total over folds with a defined value.
    * ``mean``: unweighted average over defined folds.
    * ``weighted_mean``: average weighted by each fold's ``support_n``.
    * ``majority_vote``: the label carried by strictly more than half of all
      folds, else the default label.
    * ``none``: kept undefined in the aggregate (fold values remain visible).

    A statistic undefined in every fold aggregates to the undefined marker
    with a reason.  When exactly one fold is defined, the numeric strategies
    return that fold's value unchanged, which makes the single-fold pipeline
    bit-identical to an unpartitioned computation.
    """
    fold_stats = list(fold_stats)
    if not fold_stats:
        raise ValidationError("aggregate() needs at least one fold")
    n_effective = len(fold_stats)
    names = list(fold_stats[0].values.keys())
    for fs in fold_stats:
        if list(fs.values.keys()) != names:
            raise ValidationError("fold statistics disagree on statistic names")
    missing = [n for n in names if n not in spec.strategies]
    if missing:
        raise ValidationError(f"no aggregation strategy for statistics {missing}")

    aggregates: dict = {}
    reasons: dict = {}
    vote_detail: dict = {}
    for name in names:
        strategy = spec.strategies[name]
        defined = [(fs.values[name], fs.support_n) for fs in fold_stats
                   if fs.values[name] is not None]
        if strategy == "none":
            aggregates[name] = None
            reasons[name] = "not aggregated; see per-fold values"
            continue
        if strategy == "majority_vote":
            default = spec.vote_defaults.get(name, False)
            aggregates[name] = _majority_vote(fold_stats, name, n_effective, default)
            vote_detail[name] = vote_tally(fold_stats, name, n_effective)
            continue
        if not defined:
            aggregates[name] = None
            reasons[name] = "undefined in every fold"
            continue
        if len(defined) == 1:
            aggregates[name] = defined[0][0]
            continue
        if strategy == "sum":
            aggregates[name] = _exact_sum(v for v, _ in defined)
        elif strategy == "mean":
            aggregates[name] = math.fsum(v for v, _ in defined) / len(defined)
        elif strategy == "weighted_mean":
            total_w = sum(w for _, w in defined)
            if total_w == 0:
                aggregates[name] = None
                reasons[name] = "zero total support"
            else:
                aggregates[name] = math.fsum(v * w for v, w in defined) / total_w
        else:  # pragma: no cover - guarded in AggregationSpec
            raise ValidationError(f"unknown strategy {strategy!r}")
    return MergedMeasure(
        group_key=group_key or [],
        aggregates=aggregates,
        fold_stats=fold_stats,
        n_effective=n_effective,
        vote_detail=vote_detail,
        provenance=provenance or {},
        reasons=reasons,
    )


def _exact_sum(values):
    """Integer-exact when all inputs are ints (counts), float otherwise."""
    values = list(values)
    if all(isinstance(v, int) for v in values):
        return sum(values)
    return math.fsum(values)
