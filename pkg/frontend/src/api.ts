// Typed client for the listening-test service JSON API. The payloads are
// deliberately blind: slots carry opaque tokens only, so nothing in this
// module (or in what it renders) can reveal which condition sits where.

export interface SlotRef {
  slot: number;
  token: string;
}

export interface TrialView {
  trial_id: string;
  training: boolean;
  reference_token: string;
  slots: SlotRef[];
}

export interface PlanView {
  listener_id: string;
  training: TrialView[];
  sessions: TrialView[][];
  volume_locked_after_training: boolean;
  client_session_token: string;
}

export interface SubmissionPayload {
  listener_id: string;
  trial_id: string;
  client_session_token: string;
  scores: Record<string, number>;
  auditioned: Record<string, boolean>;
}

export type SubmitOutcome =
  | { kind: "stored" }
  | { kind: "duplicate" }
  | { kind: "rejected"; detail: string }
  | { kind: "network-error"; detail: string };

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async getPlan(listenerId: string, sessionToken?: string): Promise<PlanView> {
    const query = sessionToken ? `?token=${encodeURIComponent(sessionToken)}` : "";
    const response = await this.fetchFn(
      `${this.base}/plan/${encodeURIComponent(listenerId)}${query}`,
    );
    if (response.status === 409) {
      throw new Error("another tab already runs this listener's session");
    }
    if (!response.ok) {
      throw new Error(`plan request failed (${response.status})`);
    }
    return (await response.json()) as PlanView;
  }

  audioUrl(token: string, listenerId: string): string {
    return `${this.base}/audio/${token}?listener=${encodeURIComponent(listenerId)}`;
  }

  async probeAudio(token: string, listenerId: string): Promise<boolean> {
    try {
      const response = await this.fetchFn(this.audioUrl(token, listenerId));
      return response.ok;
    } catch {
      return false;
    }
  }

  async submit(payload: SubmissionPayload): Promise<SubmitOutcome> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.base}/submit`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (error) {
      return { kind: "network-error", detail: String(error) };
    }
    if (response.ok) {
      const body = (await response.json()) as { status: string };
      return body.status === "duplicate" ? { kind: "duplicate" } : { kind: "stored" };
    }
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    if (response.status === 409) {
      // an identical trial was already stored with different grades
      return { kind: "rejected", detail };
    }
    return response.status >= 500
      ? { kind: "network-error", detail }
      : { kind: "rejected", detail };
  }
}
