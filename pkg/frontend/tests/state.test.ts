import { describe, expect, it } from "vitest";

import { ApiClient, PlanView, TrialView } from "../src/api.js";
import { SCALE_LABELS, SessionController, TrialState } from "../src/state.js";

function trialView(id: string, training = false): TrialView {
  return {
    trial_id: id,
    training,
    reference_token: `ref-${id}`,
    slots: Array.from({ length: 8 }, (_, slot) => ({ slot, token: `${id}-tok${slot}` })),
  };
}

function planView(): PlanView {
  return {
    listener_id: "alice",
    training: [trialView("train1", true)],
    sessions: [
      [trialView("t01"), trialView("t02")],
      [trialView("t03")],
    ],
    volume_locked_after_training: true,
    client_session_token: "sess-1",
  };
}

type FetchLike = typeof fetch;

function stubFetch(handler: (url: string, init?: RequestInit) => Response | Error): FetchLike {
  return (async (input: RequestInfo | URL, init?: RequestInit) => {
    const result = handler(String(input), init);
    if (result instanceof Error) throw result;
    return result;
  }) as FetchLike;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("TrialState grading rules", () => {
  it("initializes every slider at 100", () => {
    const state = new TrialState(trialView("t01"));
    expect(state.scores).toEqual(Array(8).fill(100));
    expect(state.canSubmit()).toBe(false);
  });

  it("unlocks only when all slots are auditioned and graded", () => {
    const state = new TrialState(trialView("t01"));
    for (let slot = 0; slot < 8; slot += 1) {
      state.markAuditioned(slot);
      state.setScore(slot, 40 + slot);
    }
    expect(state.canSubmit()).toBe(true);
  });

  it("blocks and names a slot that was never played", () => {
    const state = new TrialState(trialView("t01"));
    for (let slot = 0; slot < 8; slot += 1) {
      if (slot !== 6) state.markAuditioned(slot);
      state.setScore(slot, 50);
    }
    expect(state.canSubmit()).toBe(false);
    expect(state.blockers().join(" ")).toContain("slot 7 not auditioned");
  });

  it("accepts an explicit confirmation instead of a slider touch", () => {
    const state = new TrialState(trialView("t01"));
    for (let slot = 0; slot < 8; slot += 1) {
      state.markAuditioned(slot);
      if (slot === 3) state.confirmFullScore(slot);
      else state.setScore(slot, 70);
    }
    expect(state.canSubmit()).toBe(true);
    expect(state.scores[3]).toBe(100);
  });

  it("blocks on unplayable slots until a successful retry", () => {
    const state = new TrialState(trialView("t01"));
    for (let slot = 0; slot < 8; slot += 1) {
      state.markAuditioned(slot);
      state.setScore(slot, 20);
    }
    state.markUnplayable(2);
    expect(state.canSubmit()).toBe(false);
    expect(state.blockers().join(" ")).toContain("slot 3 failed to load");
    state.markAuditioned(2); // retry succeeded
    expect(state.canSubmit()).toBe(true);
  });

  it("clamps and rounds scores, and sends exactly what is shown", () => {
    const state = new TrialState(trialView("t01"));
    state.setScore(0, 120);
    state.setScore(1, -3);
    state.setScore(2, 61.4);
    for (let slot = 0; slot < 8; slot += 1) state.markAuditioned(slot);
    for (let slot = 3; slot < 8; slot += 1) state.setScore(slot, 55);
    const payload = state.payload("alice", "sess-1");
    expect(payload.scores["0"]).toBe(100);
    expect(payload.scores["1"]).toBe(0);
    expect(payload.scores["2"]).toBe(61);
    expect(payload.scores["2"]).toBe(state.scores[2]);
    expect(Object.values(payload.auditioned).every(Boolean)).toBe(true);
  });
});

describe("scale labels", () => {
  it("carries the five MUSHRA bands at their boundaries", () => {
    expect(SCALE_LABELS.map((s) => s.label)).toEqual([
      "Bad", "Poor", "Fair", "Good", "Excellent",
    ]);
    expect(SCALE_LABELS.map((s) => s.from)).toEqual([0, 20, 40, 60, 80]);
  });
});

async function completeCurrent(controller: SessionController): Promise<void> {
  const phase = controller.phase();
  if (phase.kind !== "trial") throw new Error(`expected trial, got ${phase.kind}`);
  for (let slot = 0; slot < 8; slot += 1) {
    phase.state.markAuditioned(slot);
    phase.state.setScore(slot, 10 * slot);
  }
}

describe("SessionController", () => {
  it("orders training first, inserts breaks between sessions, locks volume", async () => {
    const api = new ApiClient(
      "http://svc",
      stubFetch((url) => {
        if (url.includes("/plan/")) return jsonResponse(planView());
        return jsonResponse({ status: "stored" });
      }),
    );
    const controller = new SessionController(api, "alice");
    await controller.start();

    let phase = controller.phase();
    expect(phase.kind).toBe("trial");
    if (phase.kind === "trial") expect(phase.state.view.trial_id).toBe("train1");
    expect(controller.volumeControlVisible()).toBe(true);

    await completeCurrent(controller);
    expect((await controller.submitCurrent()).advanced).toBe(true);
    expect(controller.volumeControlVisible()).toBe(false);

    await completeCurrent(controller);
    await controller.submitCurrent();
    await completeCurrent(controller);
    await controller.submitCurrent();

    phase = controller.phase();
    expect(phase.kind).toBe("break");
    controller.acknowledgeBreak();
    await completeCurrent(controller);
    await controller.submitCurrent();
    expect(controller.phase().kind).toBe("done");
    expect(controller.submitted).toBe(4);
  });

  it("retains local state across network loss and resubmits idempotently", async () => {
    let submitCalls = 0;
    const api = new ApiClient(
      "http://svc",
      stubFetch((url) => {
        if (url.includes("/plan/")) return jsonResponse(planView());
        submitCalls += 1;
        if (submitCalls === 1) return new Error("network down");
        return jsonResponse({ status: submitCalls === 2 ? "stored" : "duplicate" });
      }),
    );
    const controller = new SessionController(api, "alice");
    await controller.start();
    await completeCurrent(controller);

    const first = await controller.submitCurrent();
    expect(first.advanced).toBe(false);
    const kept = controller.phase();
    expect(kept.kind).toBe("trial");
    if (kept.kind === "trial") {
      expect(kept.state.scores[3]).toBe(30); // grades survived the outage
      expect(kept.state.canSubmit()).toBe(true);
    }
    const second = await controller.submitCurrent();
    expect(second.advanced).toBe(true);
    expect(controller.submitted).toBe(1);
  });

  it("re-queues a server-rejected trial at the end of its session", async () => {
    let rejected = false;
    const api = new ApiClient(
      "http://svc",
      stubFetch((url, init) => {
        if (url.includes("/plan/")) return jsonResponse(planView());
        const body = JSON.parse(String(init?.body)) as { trial_id: string };
        if (body.trial_id === "t01" && !rejected) {
          rejected = true;
          return jsonResponse({ detail: "conflicting submission" }, 409);
        }
        return jsonResponse({ status: "stored" });
      }),
    );
    const controller = new SessionController(api, "alice");
    await controller.start();

    await completeCurrent(controller);
    await controller.submitCurrent(); // training stored

    await completeCurrent(controller);
    const outcome = await controller.submitCurrent(); // t01 rejected, re-queued
    expect(outcome.advanced).toBe(true);

    const next = controller.phase();
    if (next.kind !== "trial") throw new Error("expected trial");
    expect(next.state.view.trial_id).toBe("t02");
    await completeCurrent(controller);
    await controller.submitCurrent();

    const requeued = controller.phase();
    if (requeued.kind !== "trial") throw new Error("expected requeued trial");
    expect(requeued.state.view.trial_id).toBe("t01");
  });

  it("refuses to submit an incomplete trial", async () => {
    const api = new ApiClient(
      "http://svc",
      stubFetch((url) => {
        if (url.includes("/plan/")) return jsonResponse(planView());
        return jsonResponse({ status: "stored" });
      }),
    );
    const controller = new SessionController(api, "alice");
    await controller.start();
    const result = await controller.submitCurrent();
    expect(result.advanced).toBe(false);
    expect(controller.submitted).toBe(0);
  });
});
