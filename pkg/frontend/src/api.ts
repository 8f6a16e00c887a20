import type {
  AnnotationNextResponse,
  AnswerBody,
  Feedback,
  NextResponse,
  RulesView,
  SessionsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the study service JSON API. */
export class Api {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  sessions(learner: string): Promise<SessionsResponse> {
    return this.request(`/sessions/${encodeURIComponent(learner)}`);
  }

  next(learner: string, word: string): Promise<NextResponse> {
    return this.request(
      `/sessions/${encodeURIComponent(learner)}/${encodeURIComponent(word)}/next`,
    );
  }

  /**
   * Submit an answer. The example id is the idempotency token: the server
   * replays identical retries, so one retry after a network failure is safe.
   */
  async answer(learner: string, word: string, body: AnswerBody): Promise<Feedback> {
    const path =
      `/sessions/${encodeURIComponent(learner)}/${encodeURIComponent(word)}/answer`;
    try {
      return await this.post<Feedback>(path, body);
    } catch (error) {
      if (error instanceof ApiError) throw error;
      return await this.post<Feedback>(path, body);
    }
  }

  rules(word: string, learner?: string): Promise<RulesView> {
    const query = learner ? `?learner=${encodeURIComponent(learner)}` : "";
    return this.request(`/rules/${encodeURIComponent(word)}${query}`);
  }

  annotateNext(annotator: string): Promise<AnnotationNextResponse> {
    return this.request(`/annotate/${encodeURIComponent(annotator)}/next`);
  }

  annotateAnswer(annotator: string, body: AnswerBody): Promise<{ recorded: boolean }> {
    return this.post(`/annotate/${encodeURIComponent(annotator)}/answer`, body);
  }
}
