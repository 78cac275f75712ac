/** Thin typed client over the service's JSON endpoints.
 *
 * Every view reads numbers straight out of these payloads; nothing is
 * recomputed client-side.
 */

import type {
  AttackResponse,
  ErrorBody,
  ExplainResponse,
  GraphResponse,
  QueryInput,
  QueryResponse,
  SkillDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const body = await resp.json();
  if (!resp.ok) {
    const err = body as ErrorBody;
    throw new ApiError(err.code ?? "UNKNOWN", err.message ?? resp.statusText, resp.status);
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  listSkills(): Promise<{ skills: SkillDoc[] }> {
    return request(`${this.base}/skills`);
  }

  query(skillId: string, input: QueryInput): Promise<QueryResponse> {
    return post(`${this.base}/skills/${encodeURIComponent(skillId)}/query`, input);
  }

  explain(
    skillId: string,
    input: QueryInput,
    method?: string,
    params?: Record<string, unknown>,
    predictionIndex?: number,
  ): Promise<ExplainResponse> {
    const body: Record<string, unknown> = { ...input };
    if (method) body.method = method;
    if (params && Object.keys(params).length) body.params = params;
    if (predictionIndex !== undefined) body.prediction_index = predictionIndex;
    return post(`${this.base}/skills/${encodeURIComponent(skillId)}/explain`, body);
  }

  attack(
    skillId: string,
    input: QueryInput,
    method: string,
    saliencyMethod?: string,
    params?: Record<string, unknown>,
  ): Promise<AttackResponse> {
    const body: Record<string, unknown> = { ...input, method };
    if (saliencyMethod) body.saliency_method = saliencyMethod;
    if (params && Object.keys(params).length) body.params = params;
    return post(`${this.base}/skills/${encodeURIComponent(skillId)}/attack`, body);
  }

  graph(skillId: string, input: QueryInput, hops?: number): Promise<GraphResponse> {
    const body: Record<string, unknown> = { ...input };
    if (hops !== undefined) body.hops = hops;
    return post(`${this.base}/skills/${encodeURIComponent(skillId)}/graph`, body);
  }
}

/** Discards responses that arrive after a newer request was issued.
 *
 * Each panel keeps one gate; `issue()` before sending, `accept(token)`
 * when the response lands. Only the newest token is accepted, so a slow
 * older response can never overwrite a fresher one.
 */
export class SequenceGate {
  private latest = 0;

  issue(): number {
    return ++this.latest;
  }

  accept(token: number): boolean {
    return token === this.latest;
  }
}
