// Session and trial state machines, free of DOM dependencies so the
// grading rules are unit-testable: sliders start at 100, submission
// unlocks only when every slot has been auditioned and every slider was
// either moved or explicitly confirmed at 100.

import { ApiClient, PlanView, SubmissionPayload, TrialView } from "./api.js";

export const SLOT_COUNT = 8;

export const SCALE_LABELS: ReadonlyArray<{ label: string; from: number }> = [
  { label: "Bad", from: 0 },
  { label: "Poor", from: 20 },
  { label: "Fair", from: 40 },
  { label: "Good", from: 60 },
  { label: "Excellent", from: 80 },
];

export class TrialState {
  readonly scores: number[] = new Array(SLOT_COUNT).fill(100);
  readonly touched: boolean[] = new Array(SLOT_COUNT).fill(false);
  readonly confirmedFull: boolean[] = new Array(SLOT_COUNT).fill(false);
  readonly auditioned: boolean[] = new Array(SLOT_COUNT).fill(false);
  readonly unplayable: boolean[] = new Array(SLOT_COUNT).fill(false);

  constructor(readonly view: TrialView) {}

  setScore(slot: number, value: number): void {
    const clamped = Math.min(100, Math.max(0, Math.round(value)));
    this.scores[slot] = clamped;
    this.touched[slot] = true;
  }

  confirmFullScore(slot: number): void {
    // explicit "this really is transparent" confirmation at 100
    this.confirmedFull[slot] = true;
  }

  markAuditioned(slot: number): void {
    this.auditioned[slot] = true;
    this.unplayable[slot] = false;
  }

  markUnplayable(slot: number): void {
    this.unplayable[slot] = true;
  }

  blockers(): string[] {
    const problems: string[] = [];
    for (let slot = 0; slot < SLOT_COUNT; slot += 1) {
      if (this.unplayable[slot]) problems.push(`slot ${slot + 1} failed to load`);
      else if (!this.auditioned[slot]) problems.push(`slot ${slot + 1} not auditioned`);
      if (!this.touched[slot] && !this.confirmedFull[slot]) {
        problems.push(`slot ${slot + 1} not graded`);
      }
    }
    return problems;
  }

  canSubmit(): boolean {
    return this.blockers().length === 0;
  }

  payload(listenerId: string, sessionToken: string): SubmissionPayload {
    const scores: Record<string, number> = {};
    const auditioned: Record<string, boolean> = {};
    for (let slot = 0; slot < SLOT_COUNT; slot += 1) {
      scores[String(slot)] = this.scores[slot]; // sent exactly as shown
      auditioned[String(slot)] = this.auditioned[slot];
    }
    return {
      listener_id: listenerId,
      trial_id: this.view.trial_id,
      client_session_token: sessionToken,
      scores,
      auditioned,
    };
  }
}

export type Phase =
  | { kind: "trial"; state: TrialState; index: number; total: number }
  | { kind: "break"; nextSession: number }
  | { kind: "done" };

interface QueueEntry {
  view: TrialView;
  session: number; // 0 for training
}

export class SessionController {
  private queue: QueueEntry[] = [];
  private position = 0;
  private breakPending = false;
  private current: TrialState | null = null;
  plan: PlanView | null = null;
  submitted = 0;

  constructor(
    private readonly api: ApiClient,
    readonly listenerId: string,
    private sessionToken?: string,
  ) {}

  async start(): Promise<void> {
    this.plan = await this.api.getPlan(this.listenerId, this.sessionToken);
    this.sessionToken = this.plan.client_session_token;
    this.queue = [];
    for (const view of this.plan.training) {
      this.queue.push({ view, session: 0 });
    }
    this.plan.sessions.forEach((session, index) => {
      for (const view of session) this.queue.push({ view, session: index + 1 });
    });
    this.position = 0;
    this.breakPending = false;
    this.current = null;
  }

  get token(): string {
    if (!this.sessionToken) throw new Error("session not started");
    return this.sessionToken;
  }

  /** Volume adjustment is allowed during training trials only. */
  volumeControlVisible(): boolean {
    const entry = this.queue[this.position];
    return entry !== undefined && entry.session === 0;
  }

  phase(): Phase {
    if (this.position >= this.queue.length) return { kind: "done" };
    if (this.breakPending) {
      return { kind: "break", nextSession: this.queue[this.position].session };
    }
    if (this.current === null) {
      this.current = new TrialState(this.queue[this.position].view);
    }
    return {
      kind: "trial",
      state: this.current,
      index: this.position,
      total: this.queue.length,
    };
  }

  acknowledgeBreak(): void {
    this.breakPending = false;
  }

  audioUrl(token: string): string {
    return this.api.audioUrl(token, this.listenerId);
  }

  /**
   * Submit the current trial. Local state is retained on network failure
   * so a resubmission after reconnect succeeds (the server is idempotent);
   * a server-side rejection re-queues the trial at the end of its session.
   */
  async submitCurrent(): Promise<{ advanced: boolean; detail?: string }> {
    const phase = this.phase();
    if (phase.kind !== "trial" || !phase.state.canSubmit()) {
      return { advanced: false, detail: "trial incomplete" };
    }
    const outcome = await this.api.submit(
      phase.state.payload(this.listenerId, this.token),
    );
    if (outcome.kind === "network-error") {
      return { advanced: false, detail: outcome.detail };
    }
    if (outcome.kind === "rejected") {
      this.requeueCurrent();
      return { advanced: true, detail: outcome.detail };
    }
    this.submitted += 1;
    this.advance();
    return { advanced: true };
  }

  private requeueCurrent(): void {
    const entry = this.queue[this.position];
    let insertAt = this.position + 1;
    while (insertAt < this.queue.length && this.queue[insertAt].session === entry.session) {
      insertAt += 1;
    }
    this.queue.splice(this.position, 1);
    this.queue.splice(insertAt - 1, 0, entry);
    this.current = null;
    this.maybeScheduleBreak();
  }

  private advance(): void {
    const finished = this.queue[this.position];
    this.position += 1;
    this.current = null;
    const next = this.queue[this.position];
    if (next !== undefined && next.session !== finished.session && next.session > 1) {
      this.breakPending = true; // rest between listening sessions
    }
  }

  private maybeScheduleBreak(): void {
    // after a requeue the session boundary may have moved; recompute lazily
    this.breakPending = false;
  }
}
