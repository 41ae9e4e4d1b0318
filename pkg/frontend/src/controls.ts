/**
 * Query and fold controls, plus the incremental feeding demo.
 *
 * The fold controls always mirror the provenance of the chart on screen:
 * after every response the app calls `syncFrom` with the partition config
 * echoed by the server, so the panel can never show settings the current
 * chart was not computed with.
 */

import type { EngineClient } from "./api.js";
import type { AnalysisResponse, ColumnSpec, PartitionConfig } from "./types.js";

export const MAX_FOLDS = 10; // larger n brings no meaningful benefit

function labeled(text: string, input: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.textContent = text;
  label.appendChild(input);
  return label;
}

export class FoldControls {
  readonly root: HTMLElement;
  private n: HTMLInputElement;
  private minFoldSize: HTMLInputElement;
  private seed: HTMLInputElement;
  private mode: HTMLSelectElement;
  private fraction: HTMLInputElement;
  private foldSize: HTMLInputElement;

  constructor(public onChange?: () => void) {
    this.root = document.createElement("fieldset");
    this.root.dataset.role = "fold-controls";
    const legend = document.createElement("legend");
    legend.textContent = "fold replication";
    this.root.appendChild(legend);

    this.n = this.numberInput("n", 5, 1, MAX_FOLDS);
    this.minFoldSize = this.numberInput("min_fold_size", 25, 1);
    this.seed = this.numberInput("seed", 0, 0);
    this.mode = document.createElement("select");
    this.mode.dataset.field = "mode";
    for (const mode of ["disjoint", "partial", "with_replacement"]) {
      const opt = document.createElement("option");
      opt.value = mode;
      opt.textContent = mode;
      this.mode.appendChild(opt);
    }
    this.fraction = this.numberInput("fraction", 0.5, 0.01, 1, 0.01);
    this.foldSize = this.numberInput("fold_size", 100, 1);

    this.root.append(
      labeled("folds (n) ", this.n),
      labeled("mode ", this.mode),
      labeled("fraction ", this.fraction),
      labeled("bootstrap fold size ", this.foldSize),
      labeled("min fold size ", this.minFoldSize),
      labeled("seed ", this.seed),
    );
    this.mode.addEventListener("change", () => this.refreshModeFields());
    this.root.addEventListener("change", () => this.onChange?.());
    this.refreshModeFields();
  }

  private numberInput(field: string, value: number, min?: number, max?: number,
                      step?: number): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "number";
    input.dataset.field = field;
    input.value = String(value);
    if (min !== undefined) input.min = String(min);
    if (max !== undefined) input.max = String(max);
    if (step !== undefined) input.step = String(step);
    return input;
  }

  private refreshModeFields(): void {
    const mode = this.mode.value;
    (this.fraction.parentElement as HTMLElement).style.display =
      mode === "partial" ? "" : "none";
    (this.foldSize.parentElement as HTMLElement).style.display =
      mode === "with_replacement" ? "" : "none";
  }

  value(): PartitionConfig {
    const n = Math.min(Math.max(Number(this.n.value) || 1, 1), MAX_FOLDS);
    const config: PartitionConfig = {
      n,
      min_fold_size: Math.max(Number(this.minFoldSize.value) || 1, 1),
      mode: this.mode.value as PartitionConfig["mode"],
      seed: Math.max(Number(this.seed.value) || 0, 0),
    };
    if (config.mode === "partial") config.fraction = Number(this.fraction.value) || 1;
    if (config.mode === "with_replacement") {
      config.fold_size = Math.max(Number(this.foldSize.value) || 1, 1);
    }
    return config;
  }

  /** Mirror the provenance of the chart currently displayed. */
  syncFrom(config: PartitionConfig): void {
    this.n.value = String(config.n);
    this.minFoldSize.value = String(config.min_fold_size);
    this.seed.value = String(config.seed);
    if (config.mode !== "incremental") this.mode.value = config.mode;
    if (config.fraction !== undefined) this.fraction.value = String(config.fraction);
    if (config.fold_size !== undefined) this.foldSize.value = String(config.fold_size);
    this.refreshModeFields();
  }
}

export interface FilterClause {
  column: string;
  op: string;
  operand: unknown;
}

export class FilterControls {
  readonly root: HTMLElement;
  private rows: HTMLElement;
  private schema: ColumnSpec[] = [];

  constructor(public onChange?: () => void) {
    this.root = document.createElement("fieldset");
    this.root.dataset.role = "filter-controls";
    const legend = document.createElement("legend");
    legend.textContent = "filters";
    this.rows = document.createElement("div");
    const add = document.createElement("button");
    add.type = "button";
    add.textContent = "add filter";
    add.dataset.role = "add-filter";
    add.addEventListener("click", () => {
      this.addRow();
      this.onChange?.();
    });
    this.root.append(legend, this.rows, add);
  }

  setSchema(schema: ColumnSpec[]): void {
    this.schema = schema;
    this.rows.replaceChildren();
  }

  addRow(column?: string, op = "eq", operand = ""): void {
    if (!this.schema.length) return;
    const row = document.createElement("div");
    row.dataset.role = "filter-row";
    const colSel = document.createElement("select");
    colSel.dataset.field = "column";
    for (const col of this.schema) {
      const opt = document.createElement("option");
      opt.value = col.name;
      opt.textContent = col.name;
      colSel.appendChild(opt);
    }
    if (column) colSel.value = column;
    const opSel = document.createElement("select");
    opSel.dataset.field = "op";
    for (const o of ["eq", "neq", "lt", "lte", "gt", "gte"]) {
      const opt = document.createElement("option");
      opt.value = o;
      opt.textContent = o;
      opSel.appendChild(opt);
    }
    opSel.value = op;
    const val = document.createElement("input");
    val.dataset.field = "operand";
    val.value = String(operand);
    const remove = document.createElement("button");
    remove.type = "button";
    remove.textContent = "x";
    remove.addEventListener("click", () => {
      row.remove();
      this.onChange?.();
    });
    row.append(colSel, opSel, val, remove);
    this.rows.appendChild(row);
  }

  value(): FilterClause[] {
    const clauses: FilterClause[] = [];
    for (const row of this.rows.querySelectorAll<HTMLElement>('[data-role="filter-row"]')) {
      const column = row.querySelector<HTMLSelectElement>('[data-field="column"]')!.value;
      const op = row.querySelector<HTMLSelectElement>('[data-field="op"]')!.value;
      const raw = row.querySelector<HTMLInputElement>('[data-field="operand"]')!.value;
      if (raw === "") continue;
      const kind = this.schema.find((c) => c.name === column)?.kind;
      let operand: unknown = raw;
      if (kind === "number") operand = Number(raw);
      else if (kind === "integer") operand = Math.trunc(Number(raw));
      else if (kind === "boolean") operand = raw === "true";
      clauses.push({ column, op, operand });
    }
    return clauses;
  }
}

/**
 * Incremental feeding demo: a synth-backed session grows by a fixed batch
 * per click while every fold parameter stays constant, and the spread
 * readout (taken from the server's chart metadata) tracks how fold
 * agreement tightens as the sample grows.
 */
export class IncrementalDemo {
  readonly root: HTMLElement;
  private session: string | null = null;
  private feedButton: HTMLButtonElement;
  private startButton: HTMLButtonElement;
  private readout: HTMLElement;
  private totalFed = 0;

  constructor(
    private client: EngineClient,
    private onSnapshot: (resp: AnalysisResponse) => void,
    private batch = 500,
    private seed = 2,
  ) {
    this.root = document.createElement("fieldset");
    this.root.dataset.role = "incremental-demo";
    const legend = document.createElement("legend");
    legend.textContent = "incremental sampling demo";
    this.startButton = document.createElement("button");
    this.startButton.type = "button";
    this.startButton.dataset.role = "start-session";
    this.startButton.textContent = "start session";
    this.feedButton = document.createElement("button");
    this.feedButton.type = "button";
    this.feedButton.dataset.role = "feed-batch";
    this.feedButton.textContent = `feed ${batch} records`;
    this.feedButton.disabled = true; // no session yet
    this.readout = document.createElement("p");
    this.readout.dataset.role = "spread-readout";
    this.readout.textContent = "fold slope spread: —";
    this.root.append(legend, this.startButton, this.feedButton, this.readout);

    this.startButton.addEventListener("click", () => void this.start());
    this.feedButton.addEventListener("click", () => void this.feed());
  }

  get fedSoFar(): number {
    return this.totalFed;
  }

  async start(): Promise<void> {
    this.session = await this.client.incrementalStart({
      synth: { kind: "noisy_linear", slope: 2.0, intercept: 1.0, noise_sd: 1.0,
               size: 1, seed: this.seed },
      metric: { kind: "linear_regression", x: "x", y: "y" },
      partition: { n: 5, min_fold_size: 1, mode: "incremental", seed: this.seed },
      chart_kind: "scatter_regression",
    });
    this.totalFed = 0;
    this.feedButton.disabled = false;
    this.readout.textContent = "fold slope spread: —";
  }

  async feed(): Promise<void> {
    if (!this.session) return;
    try {
      await this.client.incrementalFeed(this.session, this.batch);
    } catch (err) {
      // expired sessions prompt a restart instead of failing silently
      this.session = null;
      this.feedButton.disabled = true;
      this.readout.textContent = "session expired; start a new session";
      throw err;
    }
    this.totalFed += this.batch;
    const snapshot = await this.client.incrementalSnapshot(this.session);
    const spread = snapshot.chart.metadata.fold_slope_stdev;
    this.readout.textContent =
      spread === null || spread === undefined
        ? "fold slope spread: —"
        : `fold slope spread: ${spread.toPrecision(3)} at ${this.totalFed} records`;
    this.onSnapshot(snapshot);
  }
}
