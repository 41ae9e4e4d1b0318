/**
 * Descriptive statistics panel: one row per fold plus the aggregate row,
 * vote tallies for voted statistics, and warning badges. Everything shown
 * is copied from the response; the panel computes nothing.
 */

import { formatStat } from "./types.js";
import type { EngineWarning, MergedMeasure } from "./types.js";

export function renderStatsPanel(
  container: HTMLElement,
  measure: MergedMeasure | null,
  warnings: EngineWarning[] = [],
): void {
  container.replaceChildren();
  if (!measure) {
    const empty = document.createElement("p");
    empty.textContent = "No measure selected.";
    container.appendChild(empty);
    return;
  }

  const heading = document.createElement("h3");
  heading.textContent = measureLabel(measure);
  container.appendChild(heading);

  for (const warning of warnings) {
    const badge = document.createElement("span");
    badge.dataset.role = "warning-badge";
    badge.dataset.kind = warning.kind;
    badge.className = "warning-badge";
    badge.textContent = warning.message;
    container.appendChild(badge);
  }

  const statNames = Object.keys(measure.aggregates);
  const table = document.createElement("table");
  table.dataset.role = "stats-table";

  const thead = table.createTHead();
  const headRow = thead.insertRow();
  for (const name of ["fold", "rows", ...statNames]) {
    const th = document.createElement("th");
    th.textContent = name;
    headRow.appendChild(th);
  }

  const tbody = table.createTBody();
  for (const fold of measure.folds) {
    const row = tbody.insertRow();
    row.dataset.role = "fold-row";
    row.insertCell().textContent = String(fold.fold);
    row.insertCell().textContent = String(fold.support_n);
    for (const name of statNames) {
      const cell = row.insertCell();
      cell.dataset.stat = name;
      cell.textContent = formatStat(fold.values[name] ?? null);
      const reason = fold.reasons[name];
      if (reason) cell.title = reason;
    }
  }

  const aggRow = tbody.insertRow();
  aggRow.dataset.role = "aggregate-row";
  aggRow.insertCell().textContent = "aggregate";
  aggRow.insertCell().textContent = String(
    measure.folds.reduce((total, f) => total + f.support_n, 0),
  );
  for (const name of statNames) {
    const cell = aggRow.insertCell();
    cell.dataset.stat = name;
    cell.textContent = formatStat(measure.aggregates[name] ?? null);
    const reason = measure.reasons[name];
    if (reason) cell.title = reason;
  }
  container.appendChild(table);

  for (const [stat, detail] of Object.entries(measure.vote_detail)) {
    const tally = document.createElement("p");
    tally.dataset.role = "vote-tally";
    tally.dataset.stat = stat;
    const trueCount = detail.counts["true"] ?? 0;
    tally.textContent =
      `${stat}: ${trueCount} of ${detail.n_effective} folds` +
      (detail.unanimous ? " (unanimous)" : detail.majority ? " (majority)" : "");
    container.appendChild(tally);
  }
}

function measureLabel(measure: MergedMeasure): string {
  if (!measure.group_key.length) return "all rows";
  return measure.group_key.map(([col, value]) => `${col} = ${String(value)}`).join(", ");
}

/** Aggregate cell values by statistic name, for view-toggle assertions. */
export function aggregateRowValues(container: HTMLElement): Record<string, string> {
  const row = container.querySelector<HTMLTableRowElement>('[data-role="aggregate-row"]');
  const out: Record<string, string> = {};
  if (!row) return out;
  for (const cell of row.querySelectorAll<HTMLTableCellElement>("td[data-stat]")) {
    out[cell.dataset.stat as string] = cell.textContent ?? "";
  }
  return out;
}
