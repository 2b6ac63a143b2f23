/** Workbench state machine for the steer-train-inspect-approve loop.
 *
 * All transitions are driven by service responses; the only client-owned
 * data is the directive draft. Approval is gated on a finished candidate,
 * and approving is never optimistic: the flag flips only on server ack.
 */

import type { Directive } from "./directive.js";
import type { DirectivePreview, JobStatus, StatsResponse, WhatIfReport } from "./types.js";

export interface WorkbenchState {
  sessionId: string | null;
  statsGroupby: string;
  stats: StatsResponse | null;
  draft: Directive;
  draftError: string | null;
  lastSubmitted: Directive | null;
  expertId: string | null;
  preview: DirectivePreview | null;
  job: JobStatus | null;
  report: WhatIfReport | null;
  approved: string | null;
}

export const EMPTY_DRAFT: Directive = {
  source: { state_in: [] },
  target: { state_in: [] },
  cap: null,
};

export function initialState(): WorkbenchState {
  return {
    sessionId: null,
    statsGroupby: "risk",
    stats: null,
    draft: EMPTY_DRAFT,
    draftError: null,
    lastSubmitted: null,
    expertId: null,
    preview: null,
    job: null,
    report: null,
    approved: null,
  };
}

export function openSession(state: WorkbenchState, sessionId: string): WorkbenchState {
  return { ...initialState(), sessionId };
}

/** Switching the grouping invalidates the displayed numbers until the
 * server answers again; nothing is recomputed client-side. */
export function selectGroupby(state: WorkbenchState, groupby: string): WorkbenchState {
  return { ...state, statsGroupby: groupby, stats: null };
}

export function statsLoaded(state: WorkbenchState, stats: StatsResponse): WorkbenchState {
  return { ...state, stats };
}

export function editDraft(state: WorkbenchState, draft: Directive, error: string | null): WorkbenchState {
  return { ...state, draft, draftError: error };
}

export function directiveAccepted(
  state: WorkbenchState,
  expertId: string,
  preview: DirectivePreview,
): WorkbenchState {
  return {
    ...state,
    lastSubmitted: state.draft,
    expertId,
    preview,
    job: null,
    report: null,
  };
}

export function jobUpdated(state: WorkbenchState, job: JobStatus): WorkbenchState {
  return { ...state, job };
}

export function reportLoaded(state: WorkbenchState, report: WhatIfReport): WorkbenchState {
  return { ...state, report };
}

export function approvalConfirmed(state: WorkbenchState, rewardsId: string): WorkbenchState {
  return { ...state, approved: rewardsId };
}

/** The candidate rewards id, once training has finished. */
export function finishedCandidate(state: WorkbenchState): string | null {
  if (state.job && state.job.status === "done" && state.job.rewards_id) {
    return state.job.rewards_id;
  }
  return null;
}

export function canApprove(state: WorkbenchState): boolean {
  return finishedCandidate(state) !== null;
}

/** Back to the composer, pre-filled with the previously submitted draft. */
export function revise(state: WorkbenchState): WorkbenchState {
  return {
    ...state,
    draft: state.lastSubmitted ?? state.draft,
    draftError: null,
    report: null,
  };
}
