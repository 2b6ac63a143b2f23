/** Thin typed client for the session service.
 *
 * Methods forward payloads and return parsed JSON untouched; no number is
 * derived client-side. The fetch implementation is injectable for tests.
 */

import type { Directive } from "./directive.js";
import type {
  DirectiveResponse,
  JobStatus,
  SessionManifest,
  StatsResponse,
  WhatIfReport,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = String(JSON.stringify(body.detail));
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(body: unknown): Promise<{ session_id: string }> {
    return this.post("/sessions", body);
  }

  session(sid: string): Promise<SessionManifest> {
    return this.request(`/sessions/${sid}`);
  }

  stats(sid: string, groupby: string): Promise<StatsResponse> {
    return this.request(`/sessions/${sid}/stats?groupby=${encodeURIComponent(groupby)}`);
  }

  submitDirective(
    sid: string,
    directive: Directive,
    replicas: number,
    seed: number,
  ): Promise<DirectiveResponse> {
    return this.post(`/sessions/${sid}/directives`, {
      directive: { source: directive.source, target: directive.target, cap: directive.cap },
      replicas,
      seed,
    });
  }

  startTraining(sid: string, expertId: string, config: Record<string, unknown>): Promise<{ job_id: string }> {
    return this.post(`/sessions/${sid}/train`, { expert_id: expertId, config });
  }

  job(sid: string, jobId: string): Promise<JobStatus> {
    return this.request(`/sessions/${sid}/jobs/${jobId}`);
  }

  whatif(
    sid: string,
    rewardsId: string,
    groupby: string,
    config: Record<string, unknown>,
  ): Promise<WhatIfReport> {
    return this.post(`/sessions/${sid}/whatif`, { rewards_id: rewardsId, groupby, config });
  }

  approve(sid: string, rewardsId: string): Promise<{ approved: string }> {
    return this.post(`/sessions/${sid}/approve`, { rewards_id: rewardsId });
  }

  rewardsCsvUrl(sid: string): string {
    return `${this.base}/sessions/${sid}/rewards.csv`;
  }
}
