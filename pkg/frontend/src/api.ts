import type { AnswerResponse, ApiErrorBody, Role } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

async function asApiError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: "internal", message: `HTTP ${response.status}` };
  }
  return new ApiError(response.status, body);
}

export function summaryPath(ocs: string): string {
  return `/contracts/${encodeURIComponent(ocs)}/summary`;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      throw await asApiError(response);
    }
    return (await response.json()) as T;
  }

  async createSession(role: Role): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", { role });
    return body.session_id;
  }

  async ask(sessionId: string, question: string): Promise<AnswerResponse> {
    return this.post<AnswerResponse>(`/sessions/${sessionId}/ask`, { question });
  }
}
