// Typed client for the lexcrew HTTP API. The UI talks to the service
// exclusively through these three endpoints.

export type Pipeline = "agents" | "rag";

export interface CitedArticle {
  chunk_id: string;
  article_label: string;
  excerpt: string;
}

export interface AskRequest {
  question: string;
  pipeline: Pipeline;
  model_id?: string | null;
  session_id?: string | null;
}

export interface AskResponse {
  answer: string;
  outcome: "Answered" | "OffTopic" | "Failed" | string;
  cited_articles: CitedArticle[];
  run_id: string;
  latency_ms: number;
  session_id?: string | null;
}

export interface HealthResponse {
  status: string;
  index_chunks: number;
  models: string[];
  pipelines: string[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  /** Server-side hiccups are worth retrying; bad requests are not. */
  get retryable(): boolean {
    return this.status >= 500 || this.status === 502;
  }
}

async function detailOf(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
  } catch {
    return resp.statusText || `HTTP ${resp.status}`;
  }
}

export class LexcrewClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<HealthResponse> {
    const resp = await fetch(this.url("/api/health"));
    if (!resp.ok) throw new ApiError(resp.status, await detailOf(resp));
    return (await resp.json()) as HealthResponse;
  }

  /**
   * Ask one question. A 422 (question outside the labor-law scope) still
   * carries a full AskResponse with the refusal text, so it resolves
   * normally; every other non-200 rejects with ApiError.
   */
  async ask(request: AskRequest): Promise<AskResponse> {
    const resp = await fetch(this.url("/api/ask"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (resp.status === 200 || resp.status === 422) {
      return (await resp.json()) as AskResponse;
    }
    throw new ApiError(resp.status, await detailOf(resp));
  }

  async run(runId: string): Promise<unknown> {
    const resp = await fetch(this.url(`/api/runs/${runId}`));
    if (!resp.ok) throw new ApiError(resp.status, await detailOf(resp));
    return resp.json();
  }
}
