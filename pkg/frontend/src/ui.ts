// DOM rendering. Every trial page has byte-identical structure across
// conditions: eight structurally equal slot rows (play button + slider +
// confirm control) that differ only in their opaque tokens, plus the one
// labeled reference row.

import { SessionController, TrialState, SCALE_LABELS, SLOT_COUNT } from "./state.js";
import { TrialPlayer } from "./player.js";

export class TestView {
  private player: TrialPlayer;
  private statusLine: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly controller: SessionController,
  ) {
    this.player = new TrialPlayer((token) => controller.audioUrl(token));
    this.statusLine = document.createElement("p");
    this.statusLine.className = "status";
  }

  render(): void {
    const phase = this.controller.phase();
    this.root.replaceChildren();
    if (phase.kind === "done") {
      this.renderDone();
      return;
    }
    if (phase.kind === "break") {
      this.renderBreak(phase.nextSession);
      return;
    }
    this.renderTrial(phase.state, phase.index, phase.total);
  }

  private renderDone(): void {
    const head = document.createElement("h1");
    head.textContent = "All trials completed";
    const body = document.createElement("p");
    body.textContent = `Submitted ${this.controller.submitted} trials. Thank you.`;
    this.root.append(head, body);
    this.player.stop();
  }

  private renderBreak(nextSession: number): void {
    const head = document.createElement("h1");
    head.textContent = `Session ${nextSession}`;
    const body = document.createElement("p");
    body.textContent =
      "Please take a break before continuing. Start the next session when rested.";
    const go = document.createElement("button");
    go.textContent = "Start session";
    go.addEventListener("click", () => {
      this.controller.acknowledgeBreak();
      this.render();
    });
    this.root.append(head, body, go);
    this.player.stop();
  }

  private renderTrial(state: TrialState, index: number, total: number): void {
    const view = state.view;
    this.player.prepare([view.reference_token, ...view.slots.map((s) => s.token)]);
    this.player.onError = (token) => {
      const slot = view.slots.findIndex((s) => s.token === token);
      if (slot >= 0) state.markUnplayable(slot);
      this.refreshGate(state);
    };
    this.player.onAuditioned = (token) => {
      const slot = view.slots.findIndex((s) => s.token === token);
      if (slot >= 0) state.markAuditioned(slot);
      this.refreshGate(state);
    };

    const head = document.createElement("h1");
    head.textContent = view.training
      ? `Training trial ${index + 1}`
      : `Trial ${index + 1} of ${total}`;
    this.root.append(head);

    const refRow = document.createElement("div");
    refRow.className = "reference-row";
    const refButton = document.createElement("button");
    refButton.textContent = "Play reference";
    refButton.addEventListener("click", () => this.player.play(view.reference_token));
    refRow.append(refButton);
    this.root.append(refRow);

    this.root.append(this.scaleRow());

    const grid = document.createElement("div");
    grid.className = "slots";
    for (let slot = 0; slot < SLOT_COUNT; slot += 1) {
      grid.append(this.slotRow(state, slot));
    }
    this.root.append(grid);

    this.root.append(this.loopControls());
    if (this.controller.volumeControlVisible()) {
      this.root.append(this.volumeControl());
    }

    const submit = document.createElement("button");
    submit.id = "submit";
    submit.textContent = "Submit grades";
    submit.disabled = !state.canSubmit();
    submit.addEventListener("click", async () => {
      submit.disabled = true;
      const result = await this.controller.submitCurrent();
      if (!result.advanced) {
        this.statusLine.textContent = `Submission failed, kept locally. Retry. (${result.detail ?? ""})`;
        submit.disabled = !state.canSubmit();
        return;
      }
      this.render();
    });
    this.root.append(submit, this.statusLine);
    this.refreshGate(state);
  }

  private scaleRow(): HTMLElement {
    const row = document.createElement("div");
    row.className = "scale-labels";
    for (const { label } of SCALE_LABELS) {
      const cell = document.createElement("span");
      cell.textContent = label;
      row.append(cell);
    }
    return row;
  }

  private slotRow(state: TrialState, slot: number): HTMLElement {
    const view = state.view;
    const row = document.createElement("div");
    row.className = "slot-row";
    row.dataset.slot = String(slot);

    const play = document.createElement("button");
    play.textContent = String.fromCharCode(65 + slot); // A..H, no labels
    play.addEventListener("click", () => this.player.play(view.slots[slot].token));

    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "100";
    slider.step = "1";
    slider.value = String(state.scores[slot]);
    const readout = document.createElement("output");
    readout.value = String(state.scores[slot]);
    slider.addEventListener("input", () => {
      state.setScore(slot, Number(slider.value));
      readout.value = slider.value; // shown value is the sent value
      this.refreshGate(state);
    });

    const confirm = document.createElement("button");
    confirm.className = "confirm-full";
    confirm.textContent = "= 100";
    confirm.title = "Confirm this one really merits the top grade";
    confirm.addEventListener("click", () => {
      state.confirmFullScore(slot);
      this.refreshGate(state);
    });

    row.append(play, slider, readout, confirm);
    return row;
  }

  private loopControls(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "loop";
    const label = document.createElement("span");
    label.textContent = "Loop region (s):";
    const start = document.createElement("input");
    start.type = "number";
    start.min = "0";
    start.step = "0.1";
    start.value = "0";
    const end = document.createElement("input");
    end.type = "number";
    end.min = "0";
    end.step = "0.1";
    end.value = "0";
    const apply = () => this.player.setLoop(Number(start.value), Number(end.value));
    start.addEventListener("change", apply);
    end.addEventListener("change", apply);
    wrap.append(label, start, end);
    return wrap;
  }

  private volumeControl(): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "volume";
    const label = document.createElement("span");
    label.textContent = "Volume (training only):";
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "100";
    slider.value = String(Math.round(this.player.volume * 100));
    slider.addEventListener("input", () => this.player.setVolume(Number(slider.value) / 100));
    wrap.append(label, slider);
    return wrap;
  }

  private refreshGate(state: TrialState): void {
    const submit = this.root.querySelector<HTMLButtonElement>("#submit");
    if (submit) submit.disabled = !state.canSubmit();
    const blockers = state.blockers();
    this.statusLine.textContent = blockers.length
      ? `Before submitting: ${blockers.join("; ")}`
      : "Ready to submit.";
    for (const row of this.root.querySelectorAll<HTMLElement>(".slot-row")) {
      const slot = Number(row.dataset.slot);
      row.classList.toggle("unplayable", state.unplayable[slot]);
      row.classList.toggle("pending", !state.auditioned[slot]);
    }
  }
}
