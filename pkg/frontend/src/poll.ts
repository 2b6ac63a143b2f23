/** Poll a training job until it leaves the running state.
 *
 * Fixed 1-second cadence: the trace grows by one row per epoch, so faster
 * polling buys nothing and the service stays cheap to run.
 */

import type { JobStatus } from "./types.js";

export const POLL_INTERVAL_MS = 1000;

export interface PollHandle {
  done: Promise<JobStatus>;
  cancel: () => void;
}

export function pollJob(
  fetchStatus: () => Promise<JobStatus>,
  onUpdate?: (status: JobStatus) => void,
  intervalMs: number = POLL_INTERVAL_MS,
): PollHandle {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let cancelled = false;

  const done = new Promise<JobStatus>((resolve, reject) => {
    const tick = async () => {
      if (cancelled) return;
      let status: JobStatus;
      try {
        status = await fetchStatus();
      } catch (err) {
        reject(err);
        return;
      }
      if (cancelled) return;
      onUpdate?.(status);
      if (status.status !== "running") {
        resolve(status);
        return;
      }
      timer = setTimeout(tick, intervalMs);
    };
    void tick();
  });

  return {
    done,
    cancel: () => {
      cancelled = true;
      if (timer !== null) clearTimeout(timer);
    },
  };
}
