import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { AnalysisResponse } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

/** Load a captured engine response (a true wire body from the HTTP API). */
export function fixture(name: string): AnalysisResponse {
  const raw = readFileSync(join(here, "fixtures", name), "utf-8");
  return JSON.parse(raw) as AnalysisResponse;
}

export function fixtureRaw(name: string): unknown {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8"));
}

export function hover(el: Element): void {
  el.dispatchEvent(new Event("pointerenter"));
}

export function unhover(el: Element): void {
  el.dispatchEvent(new Event("pointerleave"));
}

export function click(el: Element): void {
  el.dispatchEvent(new Event("click"));
}
