/**
 * Application shell: dataset selection, query + fold controls on the left,
 * the chart in the middle, per-fold statistics on the right, and a debug
 * provenance inspector for auditing exactly which response every number on
 * screen came from.
 */

import { EngineClient } from "./api.js";
import { FilterControls, FoldControls, IncrementalDemo } from "./controls.js";
import { ChartView } from "./render.js";
import { renderStatsPanel } from "./statsPanel.js";
import { SchemaMismatchError, validateChartSpec } from "./types.js";
import type {
  AggregateMark,
  AnalysisResponse,
  ColumnSpec,
  PartitionConfig,
} from "./types.js";

export interface AppElements {
  datasetSelect: HTMLSelectElement;
  metricSelect: HTMLSelectElement;
  columnSelects: HTMLElement;
  controlsPane: HTMLElement;
  chartPane: HTMLElement;
  statsPane: HTMLElement;
  warningsPane: HTMLElement;
  errorBanner: HTMLElement;
  provenancePane: HTMLElement;
  runButton: HTMLButtonElement;
  unfoldAllToggle: HTMLInputElement;
}

export class App {
  readonly foldControls: FoldControls;
  readonly filterControls: FilterControls;
  readonly incrementalDemo: IncrementalDemo;
  view: ChartView | null = null;
  private schema: ColumnSpec[] = [];
  private requestToken = 0; // latest-wins: stale responses are dropped

  constructor(
    private client: EngineClient,
    private ui: AppElements,
    private dwellMs = 250,
  ) {
    this.foldControls = new FoldControls();
    this.filterControls = new FilterControls();
    this.incrementalDemo = new IncrementalDemo(client, (resp) =>
      this.showResponse(resp),
    );
    ui.controlsPane.append(
      this.filterControls.root,
      this.foldControls.root,
      this.incrementalDemo.root,
    );
    ui.runButton.addEventListener("click", () => void this.runAnalysis());
    ui.datasetSelect.addEventListener("change", () =>
      void this.loadSchema(ui.datasetSelect.value),
    );
    ui.unfoldAllToggle.addEventListener("change", () => {
      this.view?.setUnfoldAll(ui.unfoldAllToggle.checked);
    });
  }

  async loadDatasets(): Promise<void> {
    const datasets = await this.client.listDatasets();
    this.ui.datasetSelect.replaceChildren();
    for (const ds of datasets) {
      const opt = document.createElement("option");
      opt.value = ds.name;
      opt.textContent = `${ds.name} (${ds.rows} rows)`;
      this.ui.datasetSelect.appendChild(opt);
    }
    if (datasets.length) await this.loadSchema(datasets[0].name);
  }

  async loadSchema(name: string): Promise<void> {
    const info = await this.client.datasetSchema(name);
    this.schema = info.schema;
    this.filterControls.setSchema(info.schema);
    this.rebuildColumnSelects();
  }

  private rebuildColumnSelects(): void {
    const pane = this.ui.columnSelects;
    pane.replaceChildren();
    const metric = this.ui.metricSelect.value;
    const need: [string, (c: ColumnSpec) => boolean][] =
      metric === "proportion" ? [["column", (c) => c.kind !== "number"]]
      : metric === "mean" ? [["column", (c) => c.kind === "number" || c.kind === "integer"]]
      : metric === "linear_regression"
        ? [["x", (c) => c.kind === "number" || c.kind === "integer"],
           ["y", (c) => c.kind === "number" || c.kind === "integer"]]
      : metric === "binary_association"
        ? [["feature", (c) => c.kind === "boolean"],
           ["outcome", (c) => c.kind === "boolean"]]
      : [];
    for (const [field, accepts] of need) {
      const select = document.createElement("select");
      select.dataset.field = field;
      for (const col of this.schema.filter(accepts)) {
        const opt = document.createElement("option");
        opt.value = col.name;
        opt.textContent = `${field}: ${col.name}`;
        select.appendChild(opt);
      }
      pane.appendChild(select);
    }
  }

  buildRequest(): Record<string, unknown> {
    const metricKind = this.ui.metricSelect.value;
    const metric: Record<string, unknown> = { kind: metricKind };
    for (const select of this.ui.columnSelects.querySelectorAll<HTMLSelectElement>("select")) {
      metric[select.dataset.field as string] = select.value;
    }
    if (metricKind === "proportion") metric.value = true;
    const chartKind = metricKind === "linear_regression" ? "scatter_regression"
      : metricKind === "binary_association" ? "bubble" : "bar";
    return {
      dataset: this.ui.datasetSelect.value,
      filters: this.filterControls.value(),
      group_by: [],
      metric,
      partition: this.foldControls.value(),
      chart_kind: chartKind,
    };
  }

  async runAnalysis(): Promise<void> {
    const token = ++this.requestToken;
    try {
      const response = await this.client.analyze(this.buildRequest());
      if (token !== this.requestToken) return; // a newer request superseded this one
      this.showResponse(response);
    } catch (err) {
      if (token !== this.requestToken) return;
      this.showError(err instanceof Error ? err.message : String(err));
    }
  }

  showResponse(response: AnalysisResponse): void {
    let spec;
    try {
      spec = validateChartSpec(response.chart);
    } catch (err) {
      if (err instanceof SchemaMismatchError) {
        this.showError(err.message);
        return;
      }
      throw err;
    }
    this.hideError();
    this.view?.dispose();
    this.view = new ChartView(this.ui.chartPane, spec, {
      dwellMs: this.dwellMs,
      onMarkFocus: (mark) => this.focusMark(response, mark),
    });
    if (this.ui.unfoldAllToggle.checked) this.view.setUnfoldAll(true);

    const firstMeasure = response.measures[0] ?? null;
    renderStatsPanel(this.ui.statsPane, firstMeasure, response.warnings);
    this.renderWarnings(response);
    this.renderProvenance(response);
    this.syncControlsFromProvenance(spec.provenance);
  }

  private focusMark(response: AnalysisResponse, mark: AggregateMark | null): void {
    renderStatsPanel(this.ui.statsPane, mark ? mark.measure : null, response.warnings);
  }

  /** The fold controls must reflect the chart actually on screen. */
  private syncControlsFromProvenance(provenance: Record<string, unknown>): void {
    const partition = provenance["partition"] as PartitionConfig | undefined;
    if (partition) this.foldControls.syncFrom(partition);
  }

  private renderWarnings(response: AnalysisResponse): void {
    this.ui.warningsPane.replaceChildren();
    for (const warning of response.warnings) {
      const item = document.createElement("li");
      item.dataset.kind = warning.kind;
      item.textContent = warning.message;
      this.ui.warningsPane.appendChild(item);
    }
  }

  private renderProvenance(response: AnalysisResponse): void {
    const pre = document.createElement("pre");
    pre.dataset.role = "provenance-json";
    pre.textContent = JSON.stringify(response.chart.provenance, null, 1);
    this.ui.provenancePane.replaceChildren(pre);
  }

  showError(message: string): void {
    this.ui.errorBanner.textContent = message;
    this.ui.errorBanner.style.display = "block";
  }

  hideError(): void {
    this.ui.errorBanner.textContent = "";
    this.ui.errorBanner.style.display = "none";
  }
}

/** Build the standard three-pane layout into `root` and boot the app. */
export function mountApp(root: HTMLElement, baseUrl = ""): App {
  root.innerHTML = `
    <div class="banner" data-role="error-banner" style="display:none"></div>
    <div class="layout">
      <aside class="pane controls">
        <select data-role="dataset"></select>
        <select data-role="metric">
          <option value="proportion">proportion</option>
          <option value="mean">mean</option>
          <option value="count">count</option>
          <option value="linear_regression">linear regression</option>
          <option value="binary_association">binary association</option>
        </select>
        <div data-role="columns"></div>
        <div data-role="extra-controls"></div>
        <label><input type="checkbox" data-role="unfold-all"> unfold all</label>
        <button data-role="run">analyze</button>
      </aside>
      <main class="pane chart" data-role="chart"></main>
      <aside class="pane stats">
        <div data-role="stats"></div>
        <ul data-role="warnings"></ul>
        <details><summary>provenance</summary><div data-role="provenance"></div></details>
      </aside>
    </div>`;
  const q = <T extends HTMLElement>(sel: string) =>
    root.querySelector(`[data-role="${sel}"]`) as T;
  const app = new App(new EngineClient(baseUrl), {
    datasetSelect: q<HTMLSelectElement>("dataset"),
    metricSelect: q<HTMLSelectElement>("metric"),
    columnSelects: q("columns"),
    controlsPane: q("extra-controls"),
    chartPane: q("chart"),
    statsPane: q("stats"),
    warningsPane: q("warnings"),
    errorBanner: q("error-banner"),
    provenancePane: q("provenance"),
    runButton: q<HTMLButtonElement>("run"),
    unfoldAllToggle: q<HTMLInputElement>("unfold-all"),
  });
  return app;
}
