/**
 * Scripted fake transport for controller tests.
 *
 * Mirrors the service's observable behavior for one session: the exact state
 * summaries it returns are recorded so tests can assert the UI rendered the
 * API responses verbatim (server authority).  The step arithmetic here is a
 * test double driven by canned values, not a reimplementation: every new
 * state is looked up from the canned sequence supplied by the test.
 */

import { ApiError, SessionSummary, Transport } from "../src/api.js";

export interface CannedStep {
  interval: [number, number];
  position: number;
  variant: number;
  converged?: boolean;
}

export class FakeService implements Transport {
  summaries: SessionSummary[] = [];
  served: SessionSummary[] = [];
  private stepCursor = 0;
  private status: SessionSummary["status"] = "active";
  private revision = 0;
  private stack: number[] = [];
  offline = false;

  constructor(
    private readonly initial: CannedStep,
    private readonly steps: CannedStep[],
    private readonly history: { power: string; direction: string }[] = [],
  ) {}

  private summary(step: CannedStep, stepIndex: number): SessionSummary {
    return {
      session_id: "fake-1",
      status: this.status,
      algorithm: "tolerant",
      step_index: stepIndex,
      interval: [...step.interval] as [number, number],
      position: step.position,
      variant: step.variant,
      converged: step.converged ?? false,
      epsilon: 0.025,
      revision: this.revision,
      space: { base: 0, range: 1, step: 0.05, count: 41 },
      weights: { slightly: 0.25, moderately: 0.35, significantly: 0.45 },
    };
  }

  private serve(step: CannedStep, stepIndex: number): SessionSummary {
    const out = this.summary(step, stepIndex);
    this.served.push(out);
    return out;
  }

  async request(method: string, path: string, body?: unknown): Promise<unknown> {
    if (this.offline) {
      throw new TypeError("fetch failed");
    }
    if (method === "POST" && path === "/sessions") {
      this.revision = 0;
      this.stepCursor = 0;
      this.status = "active";
      return this.serve(this.initial, 0);
    }
    if (method === "POST" && path.endsWith("/modifiers")) {
      if (this.status !== "active") {
        throw new ApiError("session_not_active", `session is ${this.status}`, 409);
      }
      if (this.stepCursor >= this.steps.length) {
        throw new ApiError("invalid_argument", "no canned step left", 400);
      }
      this.stack.push(this.stepCursor);
      const step = this.steps[this.stepCursor]!;
      this.stepCursor += 1;
      this.revision += 1;
      this.history.push(body as { power: string; direction: string });
      return this.serve(step, this.stepCursor);
    }
    if (method === "POST" && path.endsWith("/undo")) {
      if (this.stack.length === 0) {
        throw new ApiError("undo_empty", "nothing to undo", 409);
      }
      this.stack.pop();
      this.stepCursor -= 1;
      this.history.pop();
      this.revision += 1;
      const step = this.stepCursor === 0 ? this.initial : this.steps[this.stepCursor - 1]!;
      return this.serve(step, this.stepCursor);
    }
    if (method === "POST" && path.endsWith("/confirm")) {
      this.status = "confirmed";
      this.revision += 1;
      const step = this.stepCursor === 0 ? this.initial : this.steps[this.stepCursor - 1]!;
      return this.serve(step, this.stepCursor);
    }
    if (method === "GET" && path.includes("/history")) {
      return {
        history: this.history.map((h, i) => ({
          step_index: i + 1,
          power: h.power,
          direction: h.direction,
          position: this.steps[i]!.position,
          variant: this.steps[i]!.variant,
          interval: this.steps[i]!.interval,
        })),
      };
    }
    if (method === "GET" && path.includes("/updates")) {
      const step = this.stepCursor === 0 ? this.initial : this.steps[this.stepCursor - 1]!;
      return this.serve(step, this.stepCursor);
    }
    if (method === "GET") {
      const step = this.stepCursor === 0 ? this.initial : this.steps[this.stepCursor - 1]!;
      return this.serve(step, this.stepCursor);
    }
    throw new ApiError("not_found", `unhandled ${method} ${path}`, 404);
  }
}
