/** Wire types and fetch wrappers for the statrag HTTP service.
 *
 * The shapes mirror the service responses field for field; nothing is
 * computed client-side from legal content, values are displayed as
 * received.
 */

export type StrategyChoice = "auto" | "wdi" | "swi";

export interface SourceRef {
  chunk_id: string;
  doc_id: string;
  citation: string;
  score: number;
}

export interface Section {
  state: string;
  text: string;
}

export interface StrategyInfo {
  strategy: "wdi" | "swi";
  states: string[];
  expanded_from_neighbors: boolean;
}

export interface Timings {
  route_ms: number;
  retrieve_ms: number;
  generate_ms: number;
  total_ms: number;
}

export interface Answer {
  text: string;
  sections: Section[];
  sources: SourceRef[];
  strategy: StrategyInfo;
  not_found: boolean;
  timings: Timings;
  partitions_scanned: number;
}

export interface HealthInfo {
  status: string;
  chunks: number;
  partitions: number;
}

export interface QueryRequest {
  question: string;
  strategy?: StrategyChoice;
  k?: number;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

/** Build the /query body; "auto" and an unset k are left out so the
 * server applies its configured defaults. */
export function buildQueryRequest(
  question: string,
  strategy: StrategyChoice,
  k: number | null,
): QueryRequest {
  const request: QueryRequest = { question: question.trim() };
  if (strategy !== "auto") {
    request.strategy = strategy;
  }
  if (k !== null && Number.isInteger(k) && k >= 1) {
    request.k = k;
  }
  return request;
}

async function errorFrom(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") {
      message = body.error;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, message);
}

export async function postQuery(base: string, request: QueryRequest): Promise<Answer> {
  const response = await fetch(`${base}/query`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!response.ok) {
    throw await errorFrom(response);
  }
  return (await response.json()) as Answer;
}

export async function fetchHealth(base: string): Promise<HealthInfo> {
  const response = await fetch(`${base}/health`);
  if (!response.ok) {
    throw await errorFrom(response);
  }
  return (await response.json()) as HealthInfo;
}

/** Human-readable banner text for a failed query. */
export function describeFailure(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 502 ? "remote model unavailable" : err.message;
  }
  if (err instanceof Error) {
    return `service unreachable: ${err.message}`;
  }
  return "service unreachable";
}
