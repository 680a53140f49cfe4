// Page wiring: one session, optimistic example edits reconciled with the
// service response, 1s polling while a job runs, client-side k toggle.

import { ApiError, RegrowClient } from "./api.js";
import type { CandidatesPayload, Label, SessionView } from "./api.js";
import { FIXTURES } from "./fixtures.js";
import { pollSession } from "./poll.js";
import { viewModel } from "./state.js";
import { render } from "./ui.js";

const K_CHOICES = [1, 5, 10];

class App {
  private client = new RegrowClient("");
  private session: SessionView | null = null;
  private payload: CandidatesPayload | null = null;
  private k = 10;
  private root: HTMLElement;
  private notice = "";

  constructor(root: HTMLElement) {
    this.root = root;
  }

  async start() {
    this.session = await this.client.createSession();
    this.buildChrome();
    this.paint();
  }

  private buildChrome() {
    const controls = document.getElementById("controls")!;
    const fixtureOptions = FIXTURES.map(
      (f) => `<option value="${f.id}">${f.title}</option>`,
    ).join("");
    const kOptions = K_CHOICES.map(
      (k) => `<option value="${k}" ${k === this.k ? "selected" : ""}>top ${k}</option>`,
    ).join("");
    controls.innerHTML = `
      <input id="example-input" placeholder="example string" />
      <button id="add-positive">+ positive</button>
      <button id="add-negative">− negative</button>
      <button id="infer">infer</button>
      <select id="k-select">${kOptions}</select>
      <select id="fixture-select"><option value="">load fixture…</option>${fixtureOptions}</select>
    `;
    document.getElementById("add-positive")!.addEventListener("click", () => {
      void this.addFromInput("positive");
    });
    document.getElementById("add-negative")!.addEventListener("click", () => {
      void this.addFromInput("negative");
    });
    document.getElementById("infer")!.addEventListener("click", () => {
      void this.runInference();
    });
    document.getElementById("k-select")!.addEventListener("change", (event) => {
      this.k = Number((event.target as HTMLSelectElement).value);
      this.paint(); // truncation is client side, no refetch
    });
    document.getElementById("fixture-select")!.addEventListener("change", (event) => {
      const id = (event.target as HTMLSelectElement).value;
      if (id) void this.loadFixture(id);
    });
    this.root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const example = target.getAttribute("data-example");
      if (example && target.classList.contains("remove")) {
        void this.removeExample(Number(example));
      } else if (example && target.classList.contains("toggle")) {
        void this.toggleExample(Number(example));
      }
    });
    this.root.addEventListener("mouseover", (event) => {
      const row = (event.target as HTMLElement).closest<HTMLElement>("tr.candidate");
      this.highlight(row ? Number(row.dataset.candidate) : null);
    });
  }

  private async guard<T>(action: () => Promise<T>): Promise<T | undefined> {
    try {
      const result = await action();
      this.notice = "";
      return result;
    } catch (err) {
      this.notice = err instanceof ApiError ? err.reason : String(err);
      this.paint();
      return undefined;
    }
  }

  private async addFromInput(label: Label) {
    const input = document.getElementById("example-input") as HTMLInputElement;
    const value = input.value;
    if (!value || !this.session) return;
    const updated = await this.guard(() => this.client.addExample(this.session!.id, value, label));
    if (updated) {
      this.session = updated;
      input.value = "";
      this.paint();
    }
  }

  private async removeExample(exampleId: number) {
    if (!this.session) return;
    const updated = await this.guard(() =>
      this.client.removeExample(this.session!.id, exampleId),
    );
    if (updated) {
      this.session = updated;
      this.paint();
    }
  }

  private async toggleExample(exampleId: number) {
    if (!this.session) return;
    const example = this.session.examples.find((e) => e.id === exampleId);
    if (!example) return;
    const flipped: Label = example.label === "positive" ? "negative" : "positive";
    await this.guard(async () => {
      this.session = await this.client.removeExample(this.session!.id, exampleId);
      this.session = await this.client.addExample(this.session!.id, example.string, flipped);
    });
    this.paint();
  }

  private async loadFixture(id: string) {
    const fixture = FIXTURES.find((f) => f.id === id);
    if (!fixture || !this.session) return;
    await this.guard(async () => {
      for (const example of this.session!.examples) {
        this.session = await this.client.removeExample(this.session!.id, example.id);
      }
      for (const example of fixture.examples) {
        this.session = await this.client.addExample(
          this.session!.id,
          example.string,
          example.label,
        );
      }
    });
    this.payload = null;
    this.paint();
  }

  private async runInference() {
    if (!this.session) return;
    const started = await this.guard(() => this.client.infer(this.session!.id, { seed: 0 }));
    if (!started) return;
    this.session = await this.client.getSession(this.session.id);
    this.paint();
    const handle = pollSession(this.client, this.session.id, (view) => {
      this.session = view;
      this.paint();
    });
    const finished = await handle.done;
    this.session = finished;
    if (finished.inference_state === "done") {
      this.payload = await this.client.candidates(this.session.id, 10);
    }
    this.paint();
  }

  private highlight(candidateIndex: number | null) {
    this.root.querySelectorAll<HTMLElement>("td.marker").forEach((cell) => {
      const mine = candidateIndex !== null && Number(cell.dataset.candidate) === candidateIndex;
      cell.classList.toggle("highlight", mine);
    });
  }

  private paint() {
    const view = viewModel(this.session, this.payload, this.k);
    this.root.innerHTML = render(view);
    if (this.notice) {
      this.root.insertAdjacentHTML(
        "afterbegin",
        `<div class="banner banner-error">${this.notice} <button id="retry">dismiss</button></div>`,
      );
      document.getElementById("retry")?.addEventListener("click", () => {
        this.notice = "";
        this.paint();
      });
    }
    (document.getElementById("infer") as HTMLButtonElement | null)?.toggleAttribute(
      "disabled",
      !view.canInfer,
    );
  }
}

const root = document.getElementById("app");
if (root) {
  void new App(root).start();
}
