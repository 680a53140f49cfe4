// HTML rendering as pure string functions; main.ts injects the result
// and wires events.  Keeping this side-effect free makes the rendered
// output assertable in tests without a browser.

import type { UiSessionView } from "./state.js";

const BANNER_TEXT: Record<string, string> = {
  idle: "Add examples and run inference.",
  running: "Inference running…",
  stale: "Examples changed since the last run; results are stale.",
  uninformative:
    "The posterior is spread out; add an example that separates the top candidates.",
  "no-consistent-candidate":
    "No candidate explains every example; check the labels or add positives.",
  failed: "Inference failed.",
  ok: "Up to date.",
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(view: UiSessionView): string {
  const detail = view.error ? ` (${escapeHtml(view.error)})` : "";
  return `<div class="banner banner-${view.banner}">${BANNER_TEXT[view.banner]}${detail}</div>`;
}

export function renderExamples(view: UiSessionView): string {
  if (view.examples.length === 0) {
    return `<p class="empty">No examples yet.</p>`;
  }
  const rows = view.examples
    .map((ex) => {
      const markers = ex.markers
        .map((m, i) => {
          const cls = m === null ? "unknown" : m ? "accepts" : "rejects";
          const text = m === null ? "·" : m ? "✓" : "✗";
          return `<td class="marker ${cls}" data-candidate="${i}">${text}</td>`;
        })
        .join("");
      return (
        `<tr data-example="${ex.id}">` +
        `<td class="label label-${ex.label}">${ex.label === "positive" ? "+" : "−"}</td>` +
        `<td class="string">${escapeHtml(ex.string)}</td>` +
        `<td><button class="toggle" data-example="${ex.id}">flip</button>` +
        `<button class="remove" data-example="${ex.id}">×</button></td>` +
        markers +
        `</tr>`
      );
    })
    .join("");
  return `<table class="examples"><tbody>${rows}</tbody></table>`;
}

export function renderCandidates(view: UiSessionView): string {
  if (view.candidates.length === 0) {
    return `<p class="empty">No candidates yet.</p>`;
  }
  const rows = view.candidates
    .map((c, i) => {
      const width = Math.max(1, Math.round(c.posterior * 100));
      return (
        `<tr class="candidate" data-candidate="${i}">` +
        `<td class="rank">${c.rank}</td>` +
        `<td class="regex"><code>${escapeHtml(c.regex)}</code></td>` +
        `<td class="posterior"><div class="bar" style="width:${width}%"></div>` +
        `<span>${c.posterior.toFixed(4)}</span></td>` +
        `</tr>`
      );
    })
    .join("");
  const note =
    view.totalCandidates > view.candidates.length
      ? `<p class="note">showing ${view.candidates.length} of ${view.totalCandidates}</p>`
      : "";
  return `<table class="candidates"><tbody>${rows}</tbody></table>${note}`;
}

export function render(view: UiSessionView): string {
  return (
    renderBanner(view) +
    `<section id="examples">${renderExamples(view)}</section>` +
    `<section id="candidates">${renderCandidates(view)}</section>`
  );
}

export function candidateOrder(html: string): string[] {
  // test hook: the regex column contents in document order
  const out: string[] = [];
  const pattern = /<td class="regex"><code>(.*?)<\/code><\/td>/g;
  let match;
  while ((match = pattern.exec(html)) !== null) {
    out.push(match[1]);
  }
  return out;
}
