/**
 * Server-authoritative session controller.
 *
 * Holds the view model the renderer draws from.  Every field of the view
 * comes verbatim from the last server response; button handlers issue the
 * corresponding API call and adopt whatever state comes back (optimistic
 * updates are deliberately absent).  A long-poll subscription keeps the view
 * fresh when the session changes elsewhere; a failed call or poll flips the
 * connection flag so the renderer can show a stale-state banner and disable
 * input.
 */

import {
  ApiError,
  CreateSessionParams,
  DirectionWord,
  HistoryEntry,
  PowerWord,
  SemdiffClient,
  SessionSummary,
} from "./api.js";

export interface SessionView {
  sessionId: string | null;
  status: "idle" | "active" | "converged" | "confirmed" | "abandoned";
  stepIndex: number;
  interval: [number, number] | null;
  variant: number | null;
  position: number | null;
  converged: boolean;
  epsilon: number | null;
  space: SessionSummary["space"] | null;
  history: HistoryEntry[];
  connection: "ok" | "lost";
  /** machine-readable code + message of the last rejected call, for the toast */
  error: { code: string; message: string } | null;
  busy: boolean;
}

export type Listener = (view: SessionView) => void;

const IDLE_VIEW: SessionView = {
  sessionId: null,
  status: "idle",
  stepIndex: 0,
  interval: null,
  variant: null,
  position: null,
  converged: false,
  epsilon: null,
  space: null,
  history: [],
  connection: "ok",
  error: null,
  busy: false,
};

export class SessionController {
  private view: SessionView = { ...IDLE_VIEW };
  private listeners: Listener[] = [];
  private polling = false;
  private pollAbort = false;

  constructor(private readonly client: SemdiffClient) {}

  onChange(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.snapshot());
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  snapshot(): SessionView {
    return { ...this.view, interval: this.view.interval ? [...this.view.interval] : null };
  }

  /** Modifier buttons are usable only on a live, reachable, active session. */
  get inputEnabled(): boolean {
    return (
      this.view.sessionId !== null &&
      this.view.status === "active" &&
      this.view.connection === "ok" &&
      !this.view.busy
    );
  }

  get confirmEnabled(): boolean {
    return (
      this.view.sessionId !== null &&
      (this.view.status === "active" || this.view.status === "converged") &&
      this.view.connection === "ok" &&
      !this.view.busy
    );
  }

  get undoEnabled(): boolean {
    return this.confirmEnabled && this.view.stepIndex > 0;
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.snapshot());
    }
  }

  private adopt(summary: SessionSummary, history?: HistoryEntry[]): void {
    this.lastRevision = Math.max(this.lastRevision, summary.revision);
    this.view = {
      ...this.view,
      sessionId: summary.session_id,
      status: summary.status,
      stepIndex: summary.step_index,
      interval: [summary.interval[0], summary.interval[1]],
      variant: summary.variant,
      position: summary.position,
      converged: summary.converged,
      epsilon: summary.epsilon,
      space: summary.space,
      history: history ?? this.view.history,
      connection: "ok",
      error: null,
    };
    this.emit();
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      // the server answered: session state is authoritative, surface the code
      this.view = { ...this.view, error: { code: err.code, message: err.message } };
    } else {
      this.view = { ...this.view, connection: "lost" };
    }
    this.emit();
  }

  private async call(action: () => Promise<SessionSummary>, refreshHistory = true): Promise<boolean> {
    this.view = { ...this.view, busy: true };
    this.emit();
    try {
      const summary = await action();
      const history =
        refreshHistory && this.view.sessionId !== null
          ? await this.client.history(summary.session_id)
          : undefined;
      this.adopt(summary, history);
      return true;
    } catch (err) {
      this.fail(err);
      return false;
    } finally {
      this.view = { ...this.view, busy: false };
      this.emit();
    }
  }

  async create(params: CreateSessionParams): Promise<boolean> {
    const ok = await this.call(() => this.client.createSession(params), false);
    if (ok) {
      this.view = { ...this.view, history: [] };
      this.emit();
    }
    return ok;
  }

  async press(power: PowerWord, direction: DirectionWord): Promise<boolean> {
    const id = this.view.sessionId;
    if (id === null || !this.inputEnabled) {
      return false;
    }
    return this.call(() => this.client.applyModifier(id, power, direction));
  }

  async undo(): Promise<boolean> {
    const id = this.view.sessionId;
    if (id === null) return false;
    return this.call(() => this.client.undo(id));
  }

  async confirm(): Promise<boolean> {
    const id = this.view.sessionId;
    if (id === null) return false;
    return this.call(() => this.client.confirm(id));
  }

  async abandon(): Promise<boolean> {
    const id = this.view.sessionId;
    if (id === null) return false;
    return this.call(() => this.client.abandon(id));
  }

  async refresh(): Promise<boolean> {
    const id = this.view.sessionId;
    if (id === null) return false;
    return this.call(() => this.client.getSession(id));
  }

  /** Long-poll loop pushing server-side changes into the view. */
  async startWatching(pollSeconds = 25): Promise<void> {
    if (this.polling || this.view.sessionId === null) return;
    this.polling = true;
    this.pollAbort = false;
    try {
      while (!this.pollAbort && this.view.sessionId !== null) {
        const id = this.view.sessionId;
        try {
          const summary = await this.client.waitForUpdate(id, this.lastRevision, pollSeconds);
          this.lastRevision = summary.revision;
          this.adopt(summary, await this.client.history(id));
        } catch (err) {
          this.fail(err);
          break;
        }
      }
    } finally {
      this.polling = false;
    }
  }

  stopWatching(): void {
    this.pollAbort = true;
  }

  private lastRevision = 0;
}
