// Session view-model. All transcript state lives on the server; this store
// only mirrors it (append-only) plus the transient bits the UI needs: the
// optimistic user bubble, the pending flag, suggestion chips, and the retry
// affordance for a failed send.

import {
  ApiClient,
  ApiError,
  CreateSessionOptions,
  Hit,
  NetworkError,
} from "./api.js";

export const SUGGEST_MODE = "suggest_followups";

export interface NamedHit extends Hit {
  readonly name?: string;
}

export interface UiMessage {
  readonly role: "user" | "assistant";
  readonly text: string;
  readonly hits?: readonly NamedHit[];
}

export interface UiSessionView {
  readonly sessionId: string | null;
  readonly messages: readonly UiMessage[];
  readonly pending: boolean;
  readonly suggestions: readonly string[];
  readonly guideMe: boolean;
  /** Text of a send that failed and can be retried; null when nothing failed. */
  readonly failedText: string | null;
  readonly errorText: string | null;
}

export type Listener = (view: UiSessionView) => void;

export class ChatStore {
  private sessionId: string | null = null;
  private committed: UiMessage[] = [];
  private optimisticText: string | null = null;
  private pending = false;
  private suggestions: readonly string[] = [];
  private guideMe = false;
  private failedText: string | null = null;
  private errorText: string | null = null;
  private sessionK = 5;
  private readonly listeners = new Set<Listener>();

  constructor(
    private readonly api: ApiClient,
    private readonly sessionOptions: CreateSessionOptions = {}
  ) {}

  get view(): UiSessionView {
    const messages = this.optimisticText
      ? [...this.committed, Object.freeze({ role: "user" as const, text: this.optimisticText })]
      : [...this.committed];
    return {
      sessionId: this.sessionId,
      messages,
      pending: this.pending,
      suggestions: this.suggestions,
      guideMe: this.guideMe,
      failedText: this.failedText,
      errorText: this.errorText,
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Create a session, or resume `resumeId` and mirror its transcript. */
  async init(resumeId?: string): Promise<void> {
    if (resumeId) {
      try {
        const session = await this.api.getSession(resumeId);
        this.adoptSession(session.session_id, session.settings.k);
        this.committed = session.turns.map((turn) =>
          Object.freeze({ role: turn.role, text: turn.text })
        );
        this.emit();
        return;
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) {
          throw err;
        }
        // expired or unknown session: fall through and start fresh
      }
    }
    const session = await this.api.createSession(this.sessionOptions);
    this.adoptSession(session.session_id, session.settings.k);
    this.committed = [];
    this.emit();
  }

  setGuideMe(on: boolean): void {
    this.guideMe = on;
    this.emit();
  }

  /** Re-issue the send that previously failed. */
  async retry(): Promise<void> {
    if (this.failedText === null || this.pending) {
      return;
    }
    const text = this.failedText;
    this.failedText = null;
    this.errorText = null;
    await this.send(text);
  }

  async clickSuggestion(index: number): Promise<void> {
    const chip = this.suggestions[index];
    if (chip === undefined || this.pending) {
      return;
    }
    await this.send(chip);
  }

  /** One full turn: optimistic bubble, POST, commit reply (and sources). */
  async send(rawText: string): Promise<void> {
    const text = rawText.trim();
    if (!text || this.pending || this.sessionId === null) {
      return;
    }
    this.pending = true;
    this.optimisticText = text;
    this.suggestions = [];
    this.failedText = null;
    this.errorText = null;
    this.emit();
    try {
      const response = await this.postWithRecreate(text);
      this.commitExchange(text, response.reply, await this.namedHits(text, response.hits));
      this.emit();
      if (this.guideMe) {
        await this.fetchSuggestions(text);
      }
    } catch (err) {
      this.optimisticText = null;
      this.failedText = text;
      this.errorText = describeError(err);
      this.emit();
    } finally {
      if (this.pending) {
        this.pending = false;
        this.emit();
      }
    }
  }

  /** POST once; on a 404 the session is gone, so create a new one and repost. */
  private async postWithRecreate(text: string, mode?: string) {
    try {
      return await this.api.postMessage(this.sessionId!, text, mode);
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 404)) {
        throw err;
      }
      const session = await this.api.createSession(this.sessionOptions);
      this.adoptSession(session.session_id, session.settings.k);
      this.committed = [];
      return await this.api.postMessage(this.sessionId!, text, mode);
    }
  }

  /** Ask the backend for follow-up chips grounded in the current topic. */
  private async fetchSuggestions(lastUserText: string): Promise<void> {
    try {
      const response = await this.postWithRecreate(lastUserText, SUGGEST_MODE);
      this.commitExchange(lastUserText, response.reply, response.hits);
      this.suggestions = response.suggestions ?? [];
      this.emit();
    } catch (err) {
      this.errorText = describeError(err);
      this.emit();
    }
  }

  /** Best-effort resolution of hit keys to site names via the search route. */
  private async namedHits(text: string, hits: readonly Hit[]): Promise<readonly NamedHit[]> {
    if (hits.length === 0) {
      return hits;
    }
    try {
      const found = await this.api.search(text, Math.max(this.sessionK, hits.length));
      const names = new Map(found.map((hit) => [hit.main_key, hit.record["name_eng"]]));
      return hits.map((hit) => {
        const name = names.get(hit.main_key);
        return name === undefined ? hit : { ...hit, name };
      });
    } catch {
      return hits;
    }
  }

  private commitExchange(userText: string, reply: string, hits: readonly NamedHit[]): void {
    this.optimisticText = null;
    this.committed.push(
      Object.freeze({ role: "user" as const, text: userText }),
      Object.freeze({ role: "assistant" as const, text: reply, hits: Object.freeze([...hits]) })
    );
  }

  private adoptSession(sessionId: string, k: number): void {
    this.sessionId = sessionId;
    this.sessionK = k;
  }

  private emit(): void {
    const snapshot = this.view;
    for (const listener of this.listeners) {
      listener(snapshot);
    }
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  if (err instanceof NetworkError) {
    return "could not reach the server";
  }
  return err instanceof Error ? err.message : String(err);
}
