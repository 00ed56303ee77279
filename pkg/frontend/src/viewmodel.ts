// UI state machine for the chat pane. Holds the message list with strategy
// badges and expandable refinement traces, the per-item rating widget state,
// and the composer state. All numbers shown come straight from the server.

import {
  AcceptResponse,
  AgentMessage,
  ApiError,
  ChatApi,
  RefinementTrace,
} from "./api.js";

// Canonical strategy names; badges map 1:1 onto these.
export const STRATEGY_BADGES = [
  "Logical Appeal",
  "Emotion Appeal",
  "Framing",
  "Evidence-based Persuasion",
  "Social Proof",
  "Anchoring",
] as const;

export type StrategyBadge = (typeof STRATEGY_BADGES)[number];

export function asStrategyBadge(name: string | null): StrategyBadge | null {
  if (name === null) {
    return null;
  }
  return (STRATEGY_BADGES as readonly string[]).includes(name) ? (name as StrategyBadge) : null;
}

export interface ViewMessage {
  speaker: "recommender" | "seeker";
  text: string;
  actionKind: string | null;
  itemId: string | null;
  strategyBadge: StrategyBadge | null;
  trace: RefinementTrace | null;
  traceExpanded: boolean;
}

export interface RatingWidget {
  itemId: string;
  pre: number | null;
  post: number | null;
}

export class ChatViewModel {
  sessionId: string | null = null;
  messages: ViewMessage[] = [];
  ratings = new Map<string, RatingWidget>();
  pending = false;
  sessionEnded = false;
  errorBanner: string | null = null;
  acceptResult: AcceptResponse | null = null;

  constructor(private api: ChatApi) {}

  get composerEnabled(): boolean {
    return this.sessionId !== null && !this.pending && !this.sessionEnded;
  }

  get recommendedItems(): string[] {
    return [...this.ratings.keys()];
  }

  ratingWidgetFor(itemId: string): RatingWidget | null {
    // the widget exists only for items the server marked recommended
    return this.ratings.get(itemId) ?? null;
  }

  private appendAgentMessage(message: AgentMessage): void {
    this.messages.push({
      speaker: "recommender",
      text: message.text,
      actionKind: message.action_kind,
      itemId: message.item_id,
      strategyBadge: asStrategyBadge(message.strategy),
      trace: message.refinement_trace,
      traceExpanded: false,
    });
    if (message.action_kind === "recommend" && message.item_id) {
      if (!this.ratings.has(message.item_id)) {
        this.ratings.set(message.item_id, { itemId: message.item_id, pre: null, post: null });
      }
    }
  }

  async start(): Promise<void> {
    if (this.sessionId !== null) {
      return; // duplicate start while a session is active is a no-op
    }
    this.errorBanner = null;
    this.pending = true;
    try {
      const created = await this.api.createSession();
      this.sessionId = created.session_id;
      this.appendAgentMessage(created.message);
    } catch (err) {
      this.errorBanner = err instanceof ApiError ? err.message : String(err);
    } finally {
      this.pending = false;
    }
  }

  async send(text: string): Promise<void> {
    if (!this.composerEnabled || !text.trim()) {
      return;
    }
    this.pending = true;
    this.errorBanner = null;
    try {
      const sessionId = this.sessionId as string;
      this.messages.push({
        speaker: "seeker",
        text,
        actionKind: null,
        itemId: null,
        strategyBadge: null,
        trace: null,
        traceExpanded: false,
      });
      const reply = await this.api.sendMessage(sessionId, text);
      this.appendAgentMessage(reply);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.sessionEnded = true;
        this.errorBanner = "session ended";
      } else {
        this.errorBanner = err instanceof ApiError ? err.message : String(err);
      }
    } finally {
      this.pending = false;
    }
  }

  toggleTrace(messageIndex: number): void {
    const message = this.messages[messageIndex];
    if (message && message.trace) {
      message.traceExpanded = !message.traceExpanded;
    }
  }

  async rate(itemId: string, stage: "pre" | "post", score: number): Promise<boolean> {
    const widget = this.ratings.get(itemId);
    if (!this.sessionId || !widget || this.sessionEnded) {
      return false;
    }
    try {
      await this.api.rateIntention(this.sessionId, itemId, stage, score);
    } catch (err) {
      this.errorBanner = err instanceof ApiError ? err.message : String(err);
      return false;
    }
    if (stage === "pre") {
      widget.pre = score;
    } else {
      widget.post = score;
    }
    return true;
  }

  async accept(itemId: string): Promise<boolean> {
    if (!this.sessionId || !this.ratings.has(itemId) || this.sessionEnded) {
      return false;
    }
    try {
      this.acceptResult = await this.api.accept(this.sessionId, itemId);
    } catch (err) {
      this.errorBanner = err instanceof ApiError ? err.message : String(err);
      return false;
    }
    this.sessionEnded = true;
    return true;
  }

  /** Server-computed persuasiveness for an item, if the export carries one. */
  exportedPersuasiveness(itemId: string): number | null {
    const entry = this.acceptResult?.human_persuasiveness.find((e) => e.item_id === itemId);
    const value = entry?.persuasiveness?.value;
    return value ?? null;
  }
}
