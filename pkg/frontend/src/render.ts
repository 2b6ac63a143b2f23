/** Pure HTML renderers for the three console views.
 *
 * Every displayed number is printed verbatim from a service payload via
 * String(); bar widths are layout only. Renderers return markup strings so
 * they are testable without a DOM.
 */

import type { Directive } from "./directive.js";
import { serializeDirective } from "./directive.js";
import type { WorkbenchState } from "./state.js";
import { canApprove } from "./state.js";
import type { DirectivePreview, StatsResponse, TraceRow, WhatIfReport } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function barWidth(value: number, max: number): number {
  if (!(max > 0)) return 0;
  return Math.round((Math.abs(value) / max) * 100);
}

function barRow(label: string, value: number, max: number, cls: string): string {
  return (
    `<div class="bar-row"><span class="bar-label">${escapeHtml(label)}</span>` +
    `<div class="bar ${cls}" style="width:${barWidth(value, max)}%"></div>` +
    `<span class="bar-value">${String(value)}</span></div>`
  );
}

// ---------------------------------------------------------------------------
// stats dashboard

export function renderStats(stats: StatsResponse | null, groupby: string): string {
  const selector = renderGroupbySelector(groupby);
  if (stats === null) {
    return (
      `<section class="stats">${selector}` +
      `<p class="empty-state">No statistics yet. Ingest an instance and observed ` +
      `trajectories to see who currently receives interventions.</p></section>`
    );
  }
  const maxAction = Math.max(...stats.actions, 0);
  const maxVisit = Math.max(...stats.visits, 0);
  const rows = stats.categories
    .map((name, i) => {
      const actions = stats.actions[i] ?? 0;
      const visits = stats.visits[i] ?? 0;
      return (
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td>${barRow("actions", actions, maxAction, "actions")}</td>` +
        `<td>${barRow("listening", visits, maxVisit, "visits")}</td></tr>`
      );
    })
    .join("");
  return (
    `<section class="stats">${selector}` +
    `<table class="stats-table"><thead><tr><th>category</th><th>actions</th>` +
    `<th>listening</th></tr></thead><tbody>${rows}</tbody></table></section>`
  );
}

const GROUPBYS = ["risk", "state", "income", "education_level", "language"];

function renderGroupbySelector(active: string): string {
  const options = GROUPBYS.map(
    (g) =>
      `<option value="${escapeHtml(g)}"${g === active ? " selected" : ""}>${escapeHtml(g)}</option>`,
  ).join("");
  return `<label>group by <select id="groupby">${options}</select></label>`;
}

// ---------------------------------------------------------------------------
// directive composer

export function renderComposer(
  draft: Directive,
  error: string | null,
  preview: DirectivePreview | null,
): string {
  let serialized: string;
  try {
    serialized = serializeDirective(draft);
  } catch (err) {
    serialized = "";
    error = error ?? String(err);
  }
  const errorBox = error
    ? `<p class="draft-error">${escapeHtml(error)}</p>`
    : `<pre class="draft-json">${escapeHtml(serialized)}</pre>`;
  const capValue = draft.cap === null ? "" : String(draft.cap);
  return (
    `<section class="composer">` +
    `<textarea id="draft-source">${escapeHtml(JSON.stringify(draft.source, null, 1))}</textarea>` +
    `<textarea id="draft-target">${escapeHtml(JSON.stringify(draft.target, null, 1))}</textarea>` +
    `<label>max moves per week <input id="draft-cap" type="number" min="1" value="${capValue}"></label>` +
    errorBox +
    (preview ? renderPreview(preview) : "") +
    `<button id="submit-directive"${error ? " disabled" : ""}>Create expert trajectories</button>` +
    `</section>`
  );
}

export function renderPreview(preview: DirectivePreview): string {
  const max = Math.max(...preview.actions_before, ...preview.actions_after, 0);
  const rows = preview.categories
    .map((name, i) => {
      const before = preview.actions_before[i] ?? 0;
      const after = preview.actions_after[i] ?? 0;
      return (
        `<tr><td>${escapeHtml(name)}</td>` +
        `<td>${barRow("before", before, max, "before")}</td>` +
        `<td>${barRow("after", after, max, "after")}</td></tr>`
      );
    })
    .join("");
  return (
    `<div class="preview"><p>${String(preview.moved_actions)} actions moved</p>` +
    `<table><thead><tr><th>category</th><th>before</th><th>after</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></div>`
  );
}

// ---------------------------------------------------------------------------
// training progress

export function renderTrainingProgress(trace: TraceRow[], status: string): string {
  if (trace.length === 0) {
    return `<section class="training"><p>training ${escapeHtml(status)}…</p></section>`;
  }
  const values = trace.map((row) => row.eval);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const points = values
    .map((v, i) => {
      const x = trace.length > 1 ? (i / (trace.length - 1)) * 100 : 0;
      const y = 40 - ((v - lo) / span) * 40;
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
  const last = trace[trace.length - 1]!;
  return (
    `<section class="training"><p>status: ${escapeHtml(status)}, epoch ${String(last.epoch)}, ` +
    `log-likelihood ${String(last.eval)}</p>` +
    `<svg viewBox="0 0 100 40" class="eval-curve"><polyline points="${points}"/></svg></section>`
  );
}

// ---------------------------------------------------------------------------
// what-if explorer

export function renderWhatIf(state: WorkbenchState): string {
  const report = state.report;
  if (report === null) {
    return `<section class="whatif"><p class="empty-state">Run a what-if once training finishes.</p></section>`;
  }
  const maxDelta = Math.max(
    ...report.categories.map((c) => Math.abs(c.actions_delta)),
    ...report.categories.map((c) => Math.abs(c.visits_delta)),
    0,
  );
  const rows = report.categories
    .map((cat) => {
      const actionsCls = cat.actions_delta >= 0 ? "delta-pos" : "delta-neg";
      const visitsCls = cat.visits_delta >= 0 ? "delta-pos" : "delta-neg";
      return (
        `<tr><td>${escapeHtml(cat.name)}</td>` +
        `<td class="${actionsCls}"><div class="bar" style="width:${barWidth(cat.actions_delta, maxDelta)}%"></div>` +
        `<span class="delta-value">${String(cat.actions_delta)}</span></td>` +
        `<td class="${visitsCls}"><div class="bar" style="width:${barWidth(cat.visits_delta, maxDelta)}%"></div>` +
        `<span class="delta-value">${String(cat.visits_delta)}</span></td></tr>`
      );
    })
    .join("");
  const hist = report.ever_called_histogram;
  const maxCount = Math.max(...hist.baseline, ...hist.candidate, 0);
  const histBars = hist.baseline
    .map((b, i) => {
      const c = hist.candidate[i] ?? 0;
      const leftEdge = hist.bin_edges[i] ?? 0;
      return (
        `<div class="hist-bin"><span>${String(leftEdge)}</span>` +
        `<div class="bar baseline" style="height:${barWidth(b, maxCount)}%"></div>` +
        `<div class="bar candidate" style="height:${barWidth(c, maxCount)}%"></div>` +
        `<span class="hist-counts">${String(b)}/${String(c)}</span></div>`
      );
    })
    .join("");
  const approveDisabled = canApprove(state) ? "" : " disabled";
  const approvedNote = state.approved
    ? `<p class="approved">approved: ${escapeHtml(state.approved)} — ` +
      `<a id="export-link" href="rewards.csv">download rewards.csv</a></p>`
    : "";
  return (
    `<section class="whatif">` +
    `<table class="deltas"><thead><tr><th>category</th><th>action delta</th>` +
    `<th>listening delta</th></tr></thead><tbody>${rows}</tbody></table>` +
    `<div class="ever-called"><p>probability of ever being called ` +
    `(baseline/candidate per bin; zero-probability arms: ` +
    `${String(hist.zero_baseline)}/${String(hist.zero_candidate)})</p>${histBars}</div>` +
    `<button id="approve"${approveDisabled}>Approve</button>` +
    `<button id="revise">Revise directive</button>` +
    approvedNote +
    `</section>`
  );
}
