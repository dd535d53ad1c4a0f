// Mirrors the /ask response schema exactly; the UI never synthesizes facts.

export const ROLES = ["contract_manager", "support", "support_unit_manager"] as const;
export type Role = (typeof ROLES)[number];

export interface TableData {
  columns: string[];
  rows: unknown[][];
}

export interface ChartSpec {
  kind: "bar" | "line" | "pie";
  title: string;
  x: string[];
  y: number[];
  y_label: string;
}

export interface AnswerResponse {
  text: string;
  cited_contracts: string[];
  sources: string[];
  table: TableData | null;
  chart: ChartSpec | null;
  out_of_domain: boolean;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}

export interface UiTurn {
  question: string;
  answer?: AnswerResponse;
  error?: ApiErrorBody;
  pending: boolean;
}
