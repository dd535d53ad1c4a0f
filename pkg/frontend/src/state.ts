// The view is a pure fold over UI events: replaying the same event log
// (role choice, API responses) always reproduces the same view.

import type { AnswerResponse, ApiErrorBody, Role, UiTurn } from "./types.js";

export type UiEvent =
  | { type: "role_selected"; role: Role }
  | { type: "session_created"; sessionId: string }
  | { type: "session_failed"; error: ApiErrorBody }
  | { type: "ask_started"; question: string }
  | { type: "ask_succeeded"; answer: AnswerResponse }
  | { type: "ask_failed"; error: ApiErrorBody };

export interface SessionView {
  role: Role | null;
  sessionId: string | null;
  banner: string | null;
  turns: UiTurn[];
}

export function initialView(): SessionView {
  return { role: null, sessionId: null, banner: null, turns: [] };
}

export function reduce(view: SessionView, event: UiEvent): SessionView {
  switch (event.type) {
    case "role_selected":
      return { ...initialView(), role: event.role };
    case "session_created":
      return { ...view, sessionId: event.sessionId, banner: null, turns: [] };
    case "session_failed":
      return { ...view, sessionId: null, banner: event.error.message };
    case "ask_started":
      return {
        ...view,
        turns: [...view.turns, { question: event.question, pending: true }],
      };
    case "ask_succeeded":
      return { ...view, turns: completeLastTurn(view.turns, { answer: event.answer }) };
    case "ask_failed":
      return { ...view, turns: completeLastTurn(view.turns, { error: event.error }) };
  }
}

function completeLastTurn(turns: UiTurn[], outcome: Partial<UiTurn>): UiTurn[] {
  const index = turns.length - 1;
  if (index < 0 || !turns[index].pending) {
    return turns;
  }
  const completed: UiTurn = { ...turns[index], ...outcome, pending: false };
  return [...turns.slice(0, index), completed];
}

export function replay(events: UiEvent[]): SessionView {
  return events.reduce(reduce, initialView());
}

// One in-flight ask per session.
export function canSend(view: SessionView): boolean {
  return view.sessionId !== null && !view.turns.some((turn) => turn.pending);
}
