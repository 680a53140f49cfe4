import type { RegrowClient, SessionView } from "./api.js";

export interface PollHandle {
  done: Promise<SessionView>;
  cancel(): void;
}

// Poll the session until the job leaves the running state.  One second
// between probes while a job runs; the caller re-renders on every tick.
export function pollSession(
  client: RegrowClient,
  sessionId: string,
  onTick: (view: SessionView) => void,
  intervalMs = 1000,
): PollHandle {
  let cancelled = false;
  let timer: ReturnType<typeof setTimeout> | undefined;
  const done = new Promise<SessionView>((resolve, reject) => {
    const probe = async () => {
      if (cancelled) return;
      try {
        const view = await client.getSession(sessionId);
        onTick(view);
        if (view.inference_state === "running") {
          timer = setTimeout(probe, intervalMs);
        } else {
          resolve(view);
        }
      } catch (err) {
        reject(err);
      }
    };
    void probe();
  });
  return {
    done,
    cancel() {
      cancelled = true;
      if (timer !== undefined) clearTimeout(timer);
    },
  };
}
