// Pure view-model construction.  Everything shown is derived from the
// latest service responses alone, so a page refresh loses nothing, and
// the candidate order is exactly the service's rank order (never
// re-sorted or renumbered here).

import type { CandidatesPayload, SessionView } from "./api.js";

export type Banner =
  | "idle"
  | "running"
  | "stale"
  | "uninformative"
  | "no-consistent-candidate"
  | "failed"
  | "ok";

export interface UiCandidate {
  rank: number;
  regex: string;
  posterior: number;
}

export interface UiExample {
  id: number;
  string: string;
  label: "positive" | "negative";
  // one marker per rendered candidate, in candidate order; null when the
  // service result predates this example
  markers: (boolean | null)[];
}

export interface UiSessionView {
  examples: UiExample[];
  candidates: UiCandidate[];
  banner: Banner;
  canInfer: boolean;
  totalCandidates: number;
  error: string | null;
}

export function banner(session: SessionView | null, payload: CandidatesPayload | null): Banner {
  if (!session) return "idle";
  if (session.inference_state === "failed") return "failed";
  if (session.inference_state === "running") return "running";
  if (payload && payload.status === "no-consistent-candidate") return "no-consistent-candidate";
  if (session.stale && session.has_result) return "stale";
  if (!session.has_result) return "idle";
  if (payload && payload.uninformative) return "uninformative";
  return "ok";
}

export function viewModel(
  session: SessionView | null,
  payload: CandidatesPayload | null,
  k: number,
): UiSessionView {
  if (!session) {
    return {
      examples: [],
      candidates: [],
      banner: "idle",
      canInfer: false,
      totalCandidates: 0,
      error: null,
    };
  }
  const shown = payload ? payload.candidates.slice(0, k) : [];
  const candidates = shown.map((c) => ({
    rank: c.rank,
    regex: c.regex,
    posterior: c.posterior,
  }));
  const examples = session.examples.map((ex) => ({
    id: ex.id,
    string: ex.string,
    label: ex.label,
    markers: shown.map((c) => {
      const entry = c.accepts.find((a) => a.example_id === ex.id);
      return entry === undefined ? null : entry.accepts;
    }),
  }));
  return {
    examples,
    candidates,
    banner: banner(session, payload),
    canInfer:
      session.inference_state !== "running" &&
      session.examples.some((ex) => ex.label === "positive"),
    totalCandidates: payload ? payload.total_candidates : 0,
    error: session.error,
  };
}
