"""Minimal static SVG rendering of a chart spec, for headless CLI output.

This is a summary view, not the interactive client: fold detail renders
unconditionally (bars get fold ticks, fits get fold lines, bubbles get their
dashed hull regions) so a single file shows both the aggregate and its
spread.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
PAD = 48


def _scale(lo: float, hi: float, pixel_lo: float, pixel_hi: float):
    span = (hi - lo) or 1.0
    return lambda v: pixel_lo + (v - lo) / span * (pixel_hi - pixel_lo)


def _frame(title: str, body: list[str]) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{PAD}" y="24" font-size="14">{escape(title)}</text>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts)


def _render_bar(chart: dict) -> str:
    marks = chart["marks"]
    values = [m["channels"]["y"] for m in marks if m["channels"]["y"] is not None]
    fold_values = [fm["y"] for m in marks for fm in m["fold_marks"] if fm["y"] is not None]
    hi = max(values + fold_values + [1.0])
    sy = _scale(0.0, hi, HEIGHT - PAD, PAD)
    n = max(len(marks), 1)
    slot = (WIDTH - 2 * PAD) / n
    body = []
    for i, m in enumerate(marks):
        x0 = PAD + i * slot + slot * 0.15
        bw = slot * 0.7
        if m["undefined"] or m["channels"]["y"] is None:
            body.append(f'<rect x="{x0:.1f}" y="{PAD}" width="{bw:.1f}" '
                        f'height="{HEIGHT - 2 * PAD}" fill="#eee" stroke="#999" '
                        f'stroke-dasharray="4 3"/>')
        else:
            y = sy(m["channels"]["y"])
            body.append(f'<rect x="{x0:.1f}" y="{y:.1f}" width="{bw:.1f}" '
                        f'height="{HEIGHT - PAD - y:.1f}" fill="#4878a8"/>')
            for fm in m["fold_marks"]:
                if fm["y"] is None:
                    continue
                fy = sy(fm["y"])
                body.append(f'<line x1="{x0:.1f}" y1="{fy:.1f}" x2="{x0 + bw:.1f}" '
                            f'y2="{fy:.1f}" stroke="#c0392b" stroke-width="1.5"/>')
        body.append(f'<text x="{x0 + bw / 2:.1f}" y="{HEIGHT - PAD + 16}" font-size="11" '
                    f'text-anchor="middle">{escape(str(m["label"]))}</text>')
    return _frame(f'bar chart: {chart["axes"].get("y", "")}', body)


def _render_regression(chart: dict) -> str:
    points = chart.get("points") or []
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    sx = _scale(min(xs), max(xs), PAD, WIDTH - PAD)
    sy = _scale(min(ys), max(ys), HEIGHT - PAD, PAD)
    body = [f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2" fill="#888"/>'
            for x, y in points]
    lo_x, hi_x = min(xs), max(xs)

    def line(slope, intercept, color, width, dash=""):
        y1, y2 = slope * lo_x + intercept, slope * hi_x + intercept
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return (f'<line x1="{sx(lo_x):.1f}" y1="{sy(y1):.1f}" x2="{sx(hi_x):.1f}" '
                f'y2="{sy(y2):.1f}" stroke="{color}" stroke-width="{width}"{extra}/>')

    for m in chart["marks"]:
        for fm in m["fold_marks"]:
            body.append(line(fm["slope"], fm["intercept"], "#c0392b", 1))
        if not m["undefined"]:
            body.append(line(m["channels"]["slope"], m["channels"]["intercept"],
                             "#2255aa", 2.5))
    spread = chart.get("metadata", {}).get("fold_slope_stdev")
    title = "regression fit with per-fold lines"
    if spread is not None:
        title += f" (fold slope sd {spread:.4g})"
    return _frame(title, body)


def _render_bubble(chart: dict) -> str:
    sx = _scale(0.0, 1.0, PAD, WIDTH - PAD)
    sy = _scale(0.0, 1.0, HEIGHT - PAD, PAD)
    body = []
    for m in chart["marks"]:
        region = m.get("unfold_region")
        if region and len(region) >= 2:
            pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in region)
            body.append(f'<polygon points="{pts}" fill="#f5d7ae" fill-opacity="0.5" '
                        f'stroke="#b8860b" stroke-dasharray="5 4"/>')
        ch = m["channels"]
        size = ch.get("size")
        r = 4 + 16 * (size if size is not None else 0.0)
        color = {"increased": "#c0392b", "decreased": "#27ae60"}.get(ch.get("color"), "#888")
        border = ' stroke="black" stroke-width="2"' if ch.get("significant") else ""
        body.append(f'<circle cx="{sx(ch["x"]):.1f}" cy="{sy(ch["y"]):.1f}" '
                    f'r="{r:.1f}" fill="{color}" fill-opacity="0.75"{border}/>')
    return _frame("support bubble chart with unfold regions", body)


def render_svg(chart: dict) -> str:
    """Render a chart-spec dict (schema irchart/1) to an SVG string."""
    kind = chart.get("chart_kind")
    if kind == "bar":
        return _render_bar(chart)
    if kind == "scatter_regression":
        return _render_regression(chart)
    if kind == "bubble":
        return _render_bubble(chart)
    raise ValueError(f"cannot render chart kind {kind!r}")
