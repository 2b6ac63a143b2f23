/** Browser entry: wires the state machine, API client and renderers.
 *
 * Everything interesting lives in the imported modules; this file only
 * touches the DOM and the network.
 */

import { ApiClient } from "./api.js";
import type { Directive } from "./directive.js";
import { DirectiveError, validateDirective } from "./directive.js";
import { pollJob } from "./poll.js";
import { PRESETS } from "./presets.js";
import {
  approvalConfirmed,
  canApprove,
  directiveAccepted,
  editDraft,
  finishedCandidate,
  initialState,
  jobUpdated,
  openSession,
  reportLoaded,
  revise,
  selectGroupby,
  statsLoaded,
  type WorkbenchState,
} from "./state.js";
import { renderComposer, renderStats, renderTrainingProgress, renderWhatIf } from "./render.js";

const api = new ApiClient("");
let state: WorkbenchState = initialState();
let nStates = 2;

function setState(next: WorkbenchState): void {
  state = next;
  draw();
}

function draw(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.innerHTML =
    renderSessionBar() +
    renderStats(state.stats, state.statsGroupby) +
    renderPresetBar() +
    renderComposer(state.draft, state.draftError, state.preview) +
    renderTrainingProgress(state.job?.trace ?? [], state.job?.status ?? "idle") +
    renderWhatIf(state);
  bind();
}

function renderSessionBar(): string {
  const sid = state.sessionId ?? "none";
  return (
    `<header><label>session <input id="session-id" value="${sid === "none" ? "" : sid}"></label>` +
    `<button id="open-session">Open</button></header>`
  );
}

function renderPresetBar(): string {
  return (
    `<nav class="presets">` +
    PRESETS.map((p) => `<button class="preset" data-preset="${p.id}">${p.label}</button>`).join("") +
    `</nav>`
  );
}

function bind(): void {
  document.getElementById("open-session")?.addEventListener("click", () => {
    const sid = (document.getElementById("session-id") as HTMLInputElement).value.trim();
    if (sid) void loadSession(sid);
  });
  document.getElementById("groupby")?.addEventListener("change", (ev) => {
    const groupby = (ev.target as HTMLSelectElement).value;
    setState(selectGroupby(state, groupby));
    void refreshStats();
  });
  document.querySelectorAll("button.preset").forEach((button) => {
    button.addEventListener("click", () => {
      const preset = PRESETS.find((p) => p.id === (button as HTMLElement).dataset.preset);
      if (preset) setState(editDraft(state, preset.directive, null));
    });
  });
  document.getElementById("draft-cap")?.addEventListener("change", (ev) => {
    const raw = (ev.target as HTMLInputElement).value;
    updateDraft({ ...state.draft, cap: raw === "" ? null : Number(raw) });
  });
  document.getElementById("draft-source")?.addEventListener("change", (ev) => {
    tryUpdateTree("source", (ev.target as HTMLTextAreaElement).value);
  });
  document.getElementById("draft-target")?.addEventListener("change", (ev) => {
    tryUpdateTree("target", (ev.target as HTMLTextAreaElement).value);
  });
  document.getElementById("submit-directive")?.addEventListener("click", () => void submitDirective());
  document.getElementById("approve")?.addEventListener("click", () => void approve());
  document.getElementById("revise")?.addEventListener("click", () => setState(revise(state)));
  const exportLink = document.getElementById("export-link");
  if (exportLink && state.sessionId) {
    exportLink.setAttribute("href", api.rewardsCsvUrl(state.sessionId));
  }
}

function tryUpdateTree(side: "source" | "target", text: string): void {
  try {
    updateDraft({ ...state.draft, [side]: JSON.parse(text) } as Directive);
  } catch (err) {
    setState(editDraft(state, state.draft, `invalid JSON in ${side}: ${String(err)}`));
  }
}

function updateDraft(draft: Directive): void {
  try {
    validateDirective(draft, nStates);
    setState(editDraft(state, draft, null));
  } catch (err) {
    const message = err instanceof DirectiveError ? err.message : String(err);
    setState(editDraft(state, draft, message));
  }
}

async function loadSession(sid: string): Promise<void> {
  await api.session(sid); // 404s before we commit to the id
  setState(openSession(state, sid));
  await refreshStats();
}

async function refreshStats(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const stats = await api.stats(state.sessionId, state.statsGroupby);
    setState(statsLoaded(state, stats));
  } catch (err) {
    banner(`stats unavailable: ${String(err)} — retry by switching the grouping`);
  }
}

async function submitDirective(): Promise<void> {
  if (!state.sessionId || state.draftError) return;
  const resp = await api.submitDirective(state.sessionId, state.draft, 5, 0);
  setState(directiveAccepted(state, resp.expert_id, resp.preview));
  const job = await api.startTraining(state.sessionId, resp.expert_id, {});
  const handle = pollJob(
    () => api.job(state.sessionId!, job.job_id),
    (status) => setState(jobUpdated(state, status)),
  );
  const finished = await handle.done;
  setState(jobUpdated(state, finished));
  const rid = finishedCandidate(state);
  if (rid) {
    const report = await api.whatif(state.sessionId, rid, state.statsGroupby, {});
    setState(reportLoaded(state, report));
  }
}

async function approve(): Promise<void> {
  const rid = finishedCandidate(state);
  if (!state.sessionId || !rid || !canApprove(state)) return;
  const ack = await api.approve(state.sessionId, rid); // no optimistic flip
  setState(approvalConfirmed(state, ack.approved));
}

function banner(message: string): void {
  const el = document.getElementById("banner");
  if (el) el.textContent = message;
}

draw();
