/**
 * SVG rendering of "irchart/1" specs with unfoldable marks.
 *
 * Unfolding is a pure view toggle over data already present in the spec:
 * fold elements are created when a mark unfolds and removed when it folds,
 * so an aggregate-only rendering contains no trace of the fold data and a
 * spec with fold detail stripped serializes identically to a folded view.
 * Layout (scales, sizes, positions of aggregate marks) depends only on
 * aggregate values and raw points, never on fold values, for the same
 * reason.
 *
 * Interaction: hovering a mark unfolds it after a short dwell; leaving
 * folds it again unless it was pinned by click. An unfold-all switch pins
 * everything at once. Undefined aggregates render grayed with the reason in
 * the tooltip, never as zero-size marks.
 */

import type { AggregateMark, ChartSpec, StatValue } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RenderOptions {
  width?: number;
  height?: number;
  /** hover dwell in ms before a mark unfolds (0 in tests) */
  dwellMs?: number;
  /** notified when a mark is focused (hover or pin) or cleared */
  onMarkFocus?: (mark: AggregateMark | null) => void;
}

interface Layout {
  width: number;
  height: number;
  pad: number;
}

interface MarkEntry {
  mark: AggregateMark;
  element: SVGElement;
  unfoldGroup: SVGGElement | null;
  pinned: boolean;
  dwell: ReturnType<typeof setTimeout> | null;
  buildUnfold: () => SVGGElement;
  /** insertion point: hulls go behind their mark, overlays in front */
  insertBefore: SVGElement | null;
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function linearScale(lo: number, hi: number, pxLo: number, pxHi: number) {
  const span = hi - lo || 1;
  return (v: number) => pxLo + ((v - lo) / span) * (pxHi - pxLo);
}

export class ChartView {
  readonly svg: SVGSVGElement;
  private entries = new Map<string, MarkEntry>();
  private unfoldAllOn = false;
  private readonly dwellMs: number;
  private readonly onMarkFocus?: (mark: AggregateMark | null) => void;

  constructor(
    container: HTMLElement,
    readonly spec: ChartSpec,
    opts: RenderOptions = {},
  ) {
    this.dwellMs = opts.dwellMs ?? 250;
    this.onMarkFocus = opts.onMarkFocus;
    const layout: Layout = {
      width: opts.width ?? 640,
      height: opts.height ?? 420,
      pad: 48,
    };
    this.svg = el("svg", {
      width: layout.width,
      height: layout.height,
      viewBox: `0 0 ${layout.width} ${layout.height}`,
      "data-chart-kind": spec.chart_kind,
    });
    container.replaceChildren(this.svg);
    if (spec.chart_kind === "bar") this.renderBar(layout);
    else if (spec.chart_kind === "scatter_regression") this.renderRegression(layout);
    else this.renderBubble(layout);
  }

  // -- public interaction surface ------------------------------------------

  isUnfolded(markId: string): boolean {
    return this.entries.get(markId)?.unfoldGroup != null;
  }

  setUnfoldAll(on: boolean): void {
    this.unfoldAllOn = on;
    for (const entry of this.entries.values()) {
      entry.pinned = on;
      if (on) this.unfold(entry);
      else this.fold(entry);
    }
  }

  togglePin(markId: string): boolean {
    const entry = this.entries.get(markId);
    if (!entry) return false;
    entry.pinned = !entry.pinned;
    if (entry.pinned) this.unfold(entry);
    else this.fold(entry);
    return entry.pinned;
  }

  dispose(): void {
    for (const entry of this.entries.values()) {
      if (entry.dwell !== null) clearTimeout(entry.dwell);
    }
  }

  // -- unfold mechanics ------------------------------------------------------

  private unfold(entry: MarkEntry): void {
    if (entry.unfoldGroup) return;
    if (entry.mark.fold_marks.length === 0 && !entry.mark.unfold_region) return;
    entry.unfoldGroup = entry.buildUnfold();
    entry.unfoldGroup.setAttribute("data-unfold-for", entry.mark.id);
    this.svg.insertBefore(entry.unfoldGroup, entry.insertBefore);
    this.onMarkFocus?.(entry.mark);
  }

  private fold(entry: MarkEntry): void {
    if (entry.dwell !== null) {
      clearTimeout(entry.dwell);
      entry.dwell = null;
    }
    if (!entry.unfoldGroup) return;
    entry.unfoldGroup.remove();
    entry.unfoldGroup = null;
  }

  private register(entry: MarkEntry): void {
    this.entries.set(entry.mark.id, entry);
    const element = entry.element;
    element.setAttribute("data-mark-id", entry.mark.id);
    element.addEventListener("pointerenter", () => {
      if (entry.unfoldGroup) return;
      if (this.dwellMs <= 0) {
        this.unfold(entry);
        return;
      }
      entry.dwell = setTimeout(() => {
        entry.dwell = null;
        this.unfold(entry);
      }, this.dwellMs);
    });
    element.addEventListener("pointerleave", () => {
      if (!entry.pinned && !this.unfoldAllOn) this.fold(entry);
      else if (entry.dwell !== null) {
        clearTimeout(entry.dwell);
        entry.dwell = null;
      }
    });
    element.addEventListener("click", () => {
      this.togglePin(entry.mark.id);
      this.onMarkFocus?.(entry.mark);
    });
    const title = el("title");
    title.textContent = entry.mark.undefined
      ? `${entry.mark.label}: undefined (${entry.mark.reason ?? "no reason given"})`
      : entry.mark.label;
    element.appendChild(title);
  }

  // -- chart kinds -----------------------------------------------------------

  private renderBar(layout: Layout): void {
    const { width, height, pad } = layout;
    const marks = this.spec.marks;
    const defined = marks
      .map((m) => m.channels.y)
      .filter((v): v is number => typeof v === "number");
    const hi = Math.max(...(defined.length ? defined : [1])) * 1.15;
    const sy = linearScale(0, hi, height - pad, pad);
    const slot = (width - 2 * pad) / Math.max(marks.length, 1);

    marks.forEach((mark, i) => {
      const x0 = pad + i * slot + slot * 0.15;
      const barWidth = slot * 0.7;
      let rect: SVGElement;
      if (mark.undefined || typeof mark.channels.y !== "number") {
        rect = el("rect", {
          x: x0, y: pad, width: barWidth, height: height - 2 * pad,
          fill: "#eeeeee", stroke: "#999999", "stroke-dasharray": "4 3",
          "data-undefined": "true",
        });
      } else {
        const top = sy(mark.channels.y);
        rect = el("rect", {
          x: x0, y: top, width: barWidth, height: height - pad - top,
          fill: "#4878a8",
        });
      }
      const label = el("text", {
        x: x0 + barWidth / 2, y: height - pad + 16,
        "font-size": 11, "text-anchor": "middle",
      });
      label.textContent = mark.label;
      this.svg.append(rect, label);
      this.register({
        mark,
        element: rect,
        unfoldGroup: null,
        pinned: false,
        dwell: null,
        insertBefore: null, // fold ticks draw above the bar
        buildUnfold: () => {
          const g = el("g");
          for (const fm of mark.fold_marks) {
            const v = fm.y;
            if (typeof v !== "number") continue;
            g.appendChild(el("line", {
              x1: x0, x2: x0 + barWidth, y1: sy(v), y2: sy(v),
              stroke: "#c0392b", "stroke-width": 1.5,
              "data-role": "fold-tick", "data-fold": String(fm.fold),
            }));
          }
          return g;
        },
      });
    });
  }

  private renderRegression(layout: Layout): void {
    const { width, height, pad } = layout;
    const points = this.spec.points ?? [];
    const xs = points.length ? points.map((p) => p[0]) : [0, 1];
    const ys = points.length ? points.map((p) => p[1]) : [0, 1];
    const loX = Math.min(...xs);
    const hiX = Math.max(...xs);
    const sx = linearScale(loX, hiX, pad, width - pad);
    const sy = linearScale(Math.min(...ys), Math.max(...ys), height - pad, pad);
    for (const [x, y] of points) {
      this.svg.appendChild(el("circle", {
        cx: sx(x), cy: sy(y), r: 2, fill: "#888888", "data-role": "point",
      }));
    }
    const lineFor = (slope: number, intercept: number, attrs: Record<string, string | number>) =>
      el("line", {
        x1: sx(loX), y1: sy(slope * loX + intercept),
        x2: sx(hiX), y2: sy(slope * hiX + intercept),
        ...attrs,
      });

    for (const mark of this.spec.marks) {
      let aggLine: SVGElement;
      if (!mark.undefined
          && typeof mark.channels.slope === "number"
          && typeof mark.channels.intercept === "number") {
        aggLine = lineFor(mark.channels.slope, mark.channels.intercept, {
          stroke: "#2255aa", "stroke-width": 2.5, "data-role": "aggregate-fit",
        });
      } else {
        aggLine = el("text", {
          x: pad, y: pad - 18, "font-size": 12, fill: "#803030",
          "data-role": "fit-unavailable",
        });
        aggLine.textContent = `fit unavailable: ${mark.reason ?? "undefined"}`;
      }
      this.svg.appendChild(aggLine);
      this.register({
        mark,
        element: aggLine,
        unfoldGroup: null,
        pinned: false,
        dwell: null,
        insertBefore: aggLine, // fold lines go under the aggregate line
        buildUnfold: () => {
          const g = el("g");
          for (const fm of mark.fold_marks) {
            if (typeof fm.slope !== "number" || typeof fm.intercept !== "number") continue;
            g.appendChild(lineFor(fm.slope, fm.intercept, {
              stroke: "#c0392b", "stroke-width": 1,
              "data-role": "fold-fit", "data-fold": String(fm.fold),
            }));
          }
          return g;
        },
      });
    }
  }

  private renderBubble(layout: Layout): void {
    const { width, height, pad } = layout;
    const sx = linearScale(0, 1, pad, width - pad);
    const sy = linearScale(0, 1, height - pad, pad);
    for (const mark of this.spec.marks) {
      const x = mark.channels.x;
      const y = mark.channels.y;
      if (typeof x !== "number" || typeof y !== "number") continue;
      const size = typeof mark.channels.size === "number" ? mark.channels.size : 0;
      const color = mark.channels.color === "increased" ? "#c0392b"
        : mark.channels.color === "decreased" ? "#27ae60" : "#888888";
      const circle = el("circle", {
        cx: sx(x), cy: sy(y), r: 4 + 16 * size,
        fill: color, "fill-opacity": 0.75, "data-role": "bubble",
      });
      if (mark.channels.significant === true) {
        circle.setAttribute("stroke", "black");
        circle.setAttribute("stroke-width", "2");
        circle.setAttribute("data-significant", "true");
      }
      this.svg.appendChild(circle);
      this.register({
        mark,
        element: circle,
        unfoldGroup: null,
        pinned: false,
        dwell: null,
        insertBefore: circle, // hull draws behind its circle
        buildUnfold: () => {
          const g = el("g");
          const region = mark.unfold_region;
          if (region && region.length >= 3) {
            g.appendChild(el("polygon", {
              points: region.map(([px, py]) => `${sx(px)},${sy(py)}`).join(" "),
              fill: "#f5d7ae", "fill-opacity": 0.45,
              stroke: "#b8860b", "stroke-dasharray": "5 4",
              "data-role": "unfold-hull",
            }));
          } else if (region && region.length === 2) {
            g.appendChild(el("line", {
              x1: sx(region[0][0]), y1: sy(region[0][1]),
              x2: sx(region[1][0]), y2: sy(region[1][1]),
              stroke: "#b8860b", "stroke-dasharray": "5 4",
              "data-role": "unfold-hull",
            }));
          } else if (region && region.length === 1) {
            g.appendChild(el("circle", {
              cx: sx(region[0][0]), cy: sy(region[0][1]), r: 3,
              fill: "none", stroke: "#b8860b", "stroke-dasharray": "2 2",
              "data-role": "unfold-hull",
            }));
          }
          for (const fm of mark.fold_marks) {
            if (typeof fm.x !== "number" || typeof fm.y !== "number") continue;
            g.appendChild(el("circle", {
              cx: sx(fm.x), cy: sy(fm.y), r: 2.5,
              fill: "#b8860b", "data-role": "fold-point",
              "data-fold": String(fm.fold),
            }));
          }
          return g;
        },
      });
    }
  }
}

/** Serialized form used for pixel-identity comparisons in tests. */
export function serializeView(view: ChartView): string {
  return view.svg.outerHTML;
}

/** Copy of a spec with all fold detail removed (aggregates untouched). */
export function stripFoldDetail(spec: ChartSpec): ChartSpec {
  const clone = JSON.parse(JSON.stringify(spec)) as ChartSpec;
  for (const mark of clone.marks) {
    mark.fold_marks = [];
    mark.unfold_region = null;
  }
  return clone;
}

export function channelValue(mark: AggregateMark, channel: string): StatValue {
  return mark.channels[channel] ?? null;
}
