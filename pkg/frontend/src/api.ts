// Typed client for the chat-service HTTP API. Every value shown in the UI
// comes from these payloads; the client never computes metrics itself.

export interface TraceCritique {
  evidence: string;
  credible: boolean;
}

export interface RefinementTrace {
  candidates: string[];
  candidate_count: number;
  critiques: TraceCritique[];
  stop_reason: string;
  iterations_used: number;
  synthetic: boolean;
}

export type ActionKind = "ask" | "recommend" | "explain";

export interface AgentMessage {
  text: string;
  action_kind: ActionKind;
  item_id: string | null;
  strategy: string | null;
  refinement_trace: RefinementTrace | null;
}

export interface CreateSessionResponse {
  session_id: string;
  message: AgentMessage;
}

export interface RatingAck {
  recorded: boolean;
  count: number;
}

export interface PersuasivenessPayload {
  value: number | null;
  defined: boolean;
  exclusion_reason: string;
}

export interface HumanPersuasiveness {
  item_id: string;
  i_pre: number;
  i_post: number;
  i_true?: number;
  persuasiveness?: PersuasivenessPayload;
}

export interface AcceptResponse {
  terminated: boolean;
  accepted_item: string;
  human_persuasiveness: HumanPersuasiveness[];
}

export interface ExportedUtterance {
  index: number;
  speaker: "recommender" | "seeker";
  text: string;
  action_kind: string | null;
  item_id: string | null;
  strategy: string | null;
}

export interface RatingRecord {
  item_id: string;
  stage: "pre" | "post";
  score: number;
}

export interface SessionExport {
  session_id: string;
  terminated: boolean;
  termination: string | null;
  accepted_item: string | null;
  utterances: ExportedUtterance[];
  ratings: RatingRecord[];
  human_persuasiveness: HumanPersuasiveness[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return text ? JSON.parse(text) : null;
  } catch {
    return null;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  const body = await parseJson(response);
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export class ChatApi {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async healthz(): Promise<boolean> {
    try {
      const body = await request<{ status: string }>(this.url("/healthz"));
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  createSession(): Promise<CreateSessionResponse> {
    return request(this.url("/sessions"), { method: "POST" });
  }

  sendMessage(sessionId: string, text: string): Promise<AgentMessage> {
    return request(this.url(`/sessions/${sessionId}/messages`), post({ text }));
  }

  rateIntention(
    sessionId: string,
    itemId: string,
    stage: "pre" | "post",
    score: number,
  ): Promise<RatingAck> {
    return request(
      this.url(`/sessions/${sessionId}/ratings`),
      post({ item_id: itemId, stage, score }),
    );
  }

  accept(sessionId: string, itemId: string): Promise<AcceptResponse> {
    return request(this.url(`/sessions/${sessionId}/accept`), post({ item_id: itemId }));
  }

  getSession(sessionId: string): Promise<SessionExport> {
    return request(this.url(`/sessions/${sessionId}`));
  }
}
