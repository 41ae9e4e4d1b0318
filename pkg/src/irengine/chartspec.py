"""Renderer-neutral chart descriptions with unfoldable fold detail.

A chart spec ("irchart/1") carries one aggregate mark per measure; each mark
embeds its full merged measure, its per-fold channel values, and (for bubble
charts) the convex-hull region spanned by the fold positions.  A client can
therefore unfold any mark without another round-trip, and stripping the fold
marks leaves exactly the chart a single-computation pipeline would produce
from the same aggregates.

Undefined aggregates are flagged explicitly and never rendered as zero;
a silent zero would manufacture exactly the false confidence the fold
replication is there to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .aggregate import MergedMeasure
from .errors import ValidationError

CHART_SCHEMA = "irchart/1"

CHART_KINDS = ("bar", "scatter_regression", "bubble")


# ---------------------------------------------------------------------------
# Convex hull (monotone chain)
# ---------------------------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[tuple]) -> list[tuple[float, float]]:
    """Minimal convex polygon around the points, via Andrew's monotone chain.

    Returns vertices in counterclockwise order starting from the
    lowest-then-leftmost point.  Degenerate inputs degrade gracefully: one
    distinct point yields a single vertex, two distinct points or a fully
    collinear set yield the two extreme endpoints.
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if not pts:
        raise ValidationError("convex_hull needs at least one point")
    if len(pts) == 1:
        return [pts[0]]
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    start = min(range(len(hull)), key=lambda i: (hull[i][1], hull[i][0]))
    return hull[start:] + hull[:start]


def hull_contains(hull: Sequence[tuple], point: tuple, tol: float = 1e-9) -> bool:
    """Signed-area containment test against a CCW hull (inclusive boundary).

    Handles the degenerate single-vertex and segment hulls.
    """
    x, y = float(point[0]), float(point[1])
    if len(hull) == 1:
        hx, hy = hull[0]
        return abs(x - hx) <= tol and abs(y - hy) <= tol
    if len(hull) == 2:
        (x1, y1), (x2, y2) = hull
        if abs(_cross((x1, y1), (x2, y2), (x, y))) > tol * max(
                1.0, abs(x2 - x1) + abs(y2 - y1)):
            return False
        lo_x, hi_x = min(x1, x2) - tol, max(x1, x2) + tol
        lo_y, hi_y = min(y1, y2) - tol, max(y1, y2) + tol
        return lo_x <= x <= hi_x and lo_y <= y <= hi_y
    for i in range(len(hull)):
        if _cross(hull[i], hull[(i + 1) % len(hull)], (x, y)) < -tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Spec types
# ---------------------------------------------------------------------------

@dataclass
class AggregateMark:
    """One visual mark: aggregate channel values plus its unfoldable detail."""
    id: str
    label: str
    channels: dict
    measure: MergedMeasure
    fold_marks: list = field(default_factory=list)
    unfold_region: Optional[list] = None
    undefined: bool = False
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "label": self.label,
            "channels": dict(self.channels),
            "fold_marks": list(self.fold_marks),
            "unfold_region": ([[x, y] for x, y in self.unfold_region]
                              if self.unfold_region is not None else None),
            "undefined": self.undefined,
            "measure": self.measure.to_dict(),
        }
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class ChartSpec:
    chart_kind: str
    marks: list[AggregateMark]
    axes: dict
    provenance: dict = field(default_factory=dict)
    points: Optional[list] = None      # raw scatter points (regression charts)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "schema": CHART_SCHEMA,
            "chart_kind": self.chart_kind,
            "axes": dict(self.axes),
            "marks": [m.to_dict() for m in self.marks],
            "metadata": dict(self.metadata),
            "provenance": self.provenance,
        }
        if self.points is not None:
            out["points"] = [[x, y] for x, y in self.points]
        return out


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_bar_chart(measures: Sequence[MergedMeasure], statistic: str,
                    provenance: Optional[dict] = None) -> ChartSpec:
    """One bar per measure; bar height is the aggregate value of
    ``statistic`` and each fold contributes an overlay tick at its own
    value.  Bars whose aggregate is undefined are emitted flagged so the
    renderer can gray them out instead of drawing a zero-height bar."""
    marks = []
    for i, m in enumerate(measures):
        if statistic not in m.aggregates:
            raise ValidationError(
                f"statistic {statistic!r} not produced by measure {m.label!r}")
        value = m.aggregates[statistic]
        if value is not None and isinstance(value, bool):
            raise ValidationError(f"bar statistic {statistic!r} must be numeric")
        fold_marks = [{"fold": fs.fold_index, "y": fs.values.get(statistic)}
                      for fs in m.fold_stats]
        marks.append(AggregateMark(
            id=f"bar-{i}",
            label=m.label,
            channels={"x": m.label, "y": value},
            measure=m,
            fold_marks=fold_marks,
            undefined=value is None,
            reason=m.reasons.get(statistic),
        ))
    return ChartSpec(chart_kind="bar", marks=marks,
                     axes={"x": "group", "y": statistic},
                     provenance=provenance or {})


def _population_stdev(values: Sequence[float]) -> Optional[float]:
    if len(values) < 2:
        return None
    mu = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in values) / len(values))


def build_regression_chart(measure: MergedMeasure, points: Sequence[tuple],
                           provenance: Optional[dict] = None) -> ChartSpec:
    """Scatter of the raw (x, y) points with one aggregate fit line and one
    line per fold that produced a defined fit.  Folds too small or too
    degenerate to fit are simply absent from the overlay.  When even the
    aggregate is undefined the scatter still renders, with a diagnostic."""
    slope = measure.aggregates.get("slope")
    intercept = measure.aggregates.get("intercept")
    undefined = slope is None or intercept is None
    fold_marks = []
    fold_slopes = []
    for fs in measure.fold_stats:
        s, b = fs.values.get("slope"), fs.values.get("intercept")
        if s is None or b is None:
            continue
        fold_marks.append({"fold": fs.fold_index, "slope": s, "intercept": b})
        fold_slopes.append(s)
    mark = AggregateMark(
        id="fit-0",
        label=measure.label,
        channels={"slope": slope, "intercept": intercept,
                  "r2": measure.aggregates.get("r2")},
        measure=measure,
        fold_marks=fold_marks,
        undefined=undefined,
        reason=measure.reasons.get("slope") if undefined else None,
    )
    spread = _population_stdev(fold_slopes)
    return ChartSpec(
        chart_kind="scatter_regression",
        marks=[mark],
        axes={"x": "x", "y": "y"},
        points=[(float(x), float(y)) for x, y in points],
        metadata={"fold_slope_stdev": spread, "fold_lines": len(fold_marks)},
        provenance=provenance or {},
    )


def _odds_direction(odds_ratio) -> Optional[str]:
    if odds_ratio is None:
        return None
    if odds_ratio > 1.0:
        return "increased"
    if odds_ratio < 1.0:
        return "decreased"
    return "neutral"


def build_bubble_chart(measures: Sequence[MergedMeasure],
                       provenance: Optional[dict] = None) -> ChartSpec:
    """One circle per measure at (positive_support, negative_support), sized
    by |phi|, colored by odds-ratio direction, with a distinct border when
    the fold vote declared the association significant.

    The unfold region is the convex hull of the per-fold support positions;
    the aggregate position is included in the hull input so the region always
    contains the circle even when folds differ in which support they managed
    to define.  Measures with no fold defining both supports are omitted and
    listed in the metadata.
    """
    marks = []
    omitted = []
    for i, m in enumerate(measures):
        x = m.aggregates.get("positive_support")
        y = m.aggregates.get("negative_support")
        fold_points = []
        fold_marks = []
        for fs in m.fold_stats:
            fx = fs.values.get("positive_support")
            fy = fs.values.get("negative_support")
            if fx is None or fy is None:
                continue
            fold_points.append((fx, fy))
            fold_marks.append({"fold": fs.fold_index, "x": fx, "y": fy,
                               "phi": fs.values.get("phi"),
                               "significant": fs.values.get("significant")})
        if x is None or y is None or not fold_points:
            omitted.append({"label": m.label,
                            "reason": "no fold defined both support values"})
            continue
        phi = m.aggregates.get("phi")
        marks.append(AggregateMark(
            id=f"bubble-{i}",
            label=m.label,
            channels={
                "x": x,
                "y": y,
                "size": abs(phi) if phi is not None else None,
                "color": _odds_direction(m.aggregates.get("odds_ratio")),
                "significant": m.aggregates.get("significant"),
            },
            measure=m,
            fold_marks=fold_marks,
            unfold_region=convex_hull(fold_points + [(x, y)]),
        ))
    return ChartSpec(
        chart_kind="bubble",
        marks=marks,
        axes={"x": "positive_support", "y": "negative_support",
              "size": "phi", "color": "odds_ratio"},
        metadata={"omitted": omitted},
        provenance=provenance or {},
    )
