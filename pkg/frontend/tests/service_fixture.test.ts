/** The explorer must display exactly the numbers the service reported.
 *
 * fixtures/report.json is a verbatim what-if response captured from the
 * backend (risk directive on a seeded 30-arm session); every delta value
 * in it has to appear unmodified in the rendered markup.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { renderWhatIf } from "../src/render.js";
import { initialState, jobUpdated, reportLoaded } from "../src/state.js";
import type { JobStatus, WhatIfReport } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

const REPORT = JSON.parse(
  readFileSync(join(FIXTURES, "report.json"), "utf8"),
) as WhatIfReport;

const DONE: JobStatus = {
  status: "done",
  expert_id: "e1",
  rewards_id: "r1",
  trace: [],
  error: null,
};

describe("service report fixture", () => {
  it("renders every fetched delta verbatim", () => {
    const state = reportLoaded(jobUpdated(initialState(), DONE), REPORT);
    const html = renderWhatIf(state);
    for (const cat of REPORT.categories) {
      expect(html).toContain(`>${String(cat.actions_delta)}<`);
      expect(html).toContain(`>${String(cat.visits_delta)}<`);
    }
  });

  it("renders the zero-probability counts verbatim", () => {
    const state = reportLoaded(jobUpdated(initialState(), DONE), REPORT);
    const html = renderWhatIf(state);
    const hist = REPORT.ever_called_histogram;
    expect(html).toContain(`${String(hist.zero_baseline)}/${String(hist.zero_candidate)}`);
  });

  it("covers every category the service grouped by", () => {
    const state = reportLoaded(jobUpdated(initialState(), DONE), REPORT);
    const html = renderWhatIf(state);
    for (const cat of REPORT.categories) {
      expect(html).toContain(cat.name);
    }
  });
});
