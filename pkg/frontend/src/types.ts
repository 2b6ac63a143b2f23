/** Payload shapes of the rmab-irl service. The console renders these
 * verbatim: every number on screen originates in one of these objects. */

export interface StatsResponse {
  groupby: string;
  categories: string[];
  actions: number[];
  visits: number[];
  state_visits: number[][];
  trajectories: number;
}

export interface DirectivePreview {
  groupby: string;
  categories: string[];
  actions_before: number[];
  actions_after: number[];
  moved_actions: number;
}

export interface DirectiveResponse {
  expert_id: string;
  preview: DirectivePreview;
}

export interface TraceRow {
  epoch: number;
  eval: number;
  grad_norm: number;
  step_seconds: number;
}

export type JobState = "running" | "done" | "failed";

export interface JobStatus {
  status: JobState;
  expert_id: string;
  rewards_id: string | null;
  trace: TraceRow[];
  error: string | null;
}

export interface WhatIfCategory {
  name: string;
  actions_baseline: number;
  actions_candidate: number;
  visits_baseline: number;
  visits_candidate: number;
  actions_delta: number;
  visits_delta: number;
  state_visits_baseline: number[];
  state_visits_candidate: number[];
}

export interface EverCalledHistogram {
  bin_edges: number[];
  baseline: number[];
  candidate: number[];
  zero_baseline: number;
  zero_candidate: number;
  per_arm_baseline: number[];
  per_arm_candidate: number[];
}

export interface WhatIfReport {
  groupby: string;
  categories: WhatIfCategory[];
  ever_called_histogram: EverCalledHistogram;
  runs: number;
  horizon: number;
  budget: number;
  rewards_id?: string;
  report_id?: string;
}

export interface SessionManifest {
  id: string;
  directives: unknown[];
  jobs: Record<string, JobStatus>;
  rewards: Record<string, unknown>;
  approved: string | null;
}
