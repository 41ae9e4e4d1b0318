/**
 * Wire types for the engine's JSON API, including the "irchart/1" chart
 * spec. The client renders these verbatim: every number on screen traces to
 * a field in a server response, and the client never computes statistics of
 * its own.
 */

export type StatValue = number | boolean | string | null;

export interface FoldStats {
  fold: number;
  values: Record<string, StatValue>;
  support_n: number;
  missing_n: number;
  reasons: Record<string, string>;
  flags: string[];
}

export interface VoteDetail {
  counts: Record<string, number>;
  defined: number;
  n_effective: number;
  unanimous: boolean;
  majority: boolean;
  at_least_one: boolean;
}

export interface MergedMeasure {
  group_key: [string, unknown][];
  aggregates: Record<string, StatValue>;
  folds: FoldStats[];
  n_effective: number;
  vote_detail: Record<string, VoteDetail>;
  reasons: Record<string, string>;
  provenance: {
    partition?: PartitionConfig;
    metric?: Record<string, unknown>;
  };
}

export interface AggregateMark {
  id: string;
  label: string;
  channels: Record<string, StatValue>;
  fold_marks: Record<string, StatValue>[];
  unfold_region: [number, number][] | null;
  undefined: boolean;
  reason?: string;
  measure: MergedMeasure;
}

export type ChartKind = "bar" | "scatter_regression" | "bubble";

export interface ChartSpec {
  schema: "irchart/1";
  chart_kind: ChartKind;
  axes: Record<string, string>;
  marks: AggregateMark[];
  points?: [number, number][];
  metadata: {
    fold_slope_stdev?: number | null;
    fold_lines?: number;
    omitted?: { label: string; reason: string }[];
  };
  provenance: Record<string, unknown>;
}

export interface PartitionConfig {
  n: number;
  min_fold_size: number;
  mode: "disjoint" | "partial" | "with_replacement" | "incremental";
  seed: number;
  fraction?: number;
  fold_size?: number;
}

export interface EngineWarning {
  kind: string;
  message: string;
  [extra: string]: unknown;
}

export interface AnalysisResponse {
  chart: ChartSpec;
  measures: MergedMeasure[];
  warnings: EngineWarning[];
}

export interface DatasetSummary {
  name: string;
  rows: number;
  columns: number;
}

export interface ColumnSpec {
  name: string;
  kind: "number" | "integer" | "category" | "boolean" | "timestamp";
}

export interface DatasetSchema {
  name: string;
  rows: number;
  schema: ColumnSpec[];
}

export class SchemaMismatchError extends Error {}

const CHART_KINDS = new Set(["bar", "scatter_regression", "bubble"]);

/**
 * Guard a payload before rendering. A failed check must surface as a
 * visible error banner, never a blank chart, so the message names the
 * problem precisely.
 */
export function validateChartSpec(value: unknown): ChartSpec {
  if (typeof value !== "object" || value === null) {
    throw new SchemaMismatchError("chart spec is not an object");
  }
  const spec = value as Partial<ChartSpec>;
  if (spec.schema !== "irchart/1") {
    throw new SchemaMismatchError(
      `unsupported chart schema ${JSON.stringify(spec.schema)}; expected "irchart/1"`,
    );
  }
  if (!spec.chart_kind || !CHART_KINDS.has(spec.chart_kind)) {
    throw new SchemaMismatchError(`unknown chart kind ${JSON.stringify(spec.chart_kind)}`);
  }
  if (!Array.isArray(spec.marks)) {
    throw new SchemaMismatchError("chart spec has no marks array");
  }
  for (const mark of spec.marks) {
    if (typeof mark.id !== "string" || typeof mark.channels !== "object") {
      throw new SchemaMismatchError(`malformed mark ${JSON.stringify(mark.id)}`);
    }
    if (!Array.isArray(mark.fold_marks)) {
      throw new SchemaMismatchError(`mark ${mark.id} is missing fold_marks`);
    }
    if (mark.unfold_region !== null && !Array.isArray(mark.unfold_region)) {
      throw new SchemaMismatchError(`mark ${mark.id} has a malformed unfold_region`);
    }
  }
  return spec as ChartSpec;
}

/** Shared formatting so the stats panel and tooltips agree. */
export function formatStat(v: StatValue): string {
  if (v === null || v === undefined) return "—";
  if (typeof v === "boolean") return v ? "yes" : "no";
  if (typeof v === "number") {
    if (Number.isInteger(v)) return String(v);
    return v.toPrecision(4);
  }
  return String(v);
}
