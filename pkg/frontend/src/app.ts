// Wires the event log, the reducer, and the renderers to the page. The
// whole view re-renders from state on every event, so what is on screen is
// exactly replay(events).

import { ApiClient, ApiError } from "./api.js";
import { renderTurn } from "./render.js";
import { canSend, initialView, reduce, type SessionView, type UiEvent } from "./state.js";
import { ROLES, type Role } from "./types.js";

export class App {
  private view: SessionView = initialView();
  readonly events: UiEvent[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly doc: Document = root.ownerDocument,
  ) {
    this.render();
  }

  dispatch(event: UiEvent): void {
    this.events.push(event);
    this.view = reduce(this.view, event);
    this.render();
  }

  async selectRole(role: Role): Promise<void> {
    this.dispatch({ type: "role_selected", role });
    try {
      const sessionId = await this.client.createSession(role);
      this.dispatch({ type: "session_created", sessionId });
    } catch (error) {
      this.dispatch({ type: "session_failed", error: toErrorBody(error) });
    }
  }

  async ask(question: string): Promise<void> {
    const trimmed = question.trim();
    if (!trimmed || !canSend(this.view) || this.view.sessionId === null) {
      return;
    }
    const sessionId = this.view.sessionId;
    this.dispatch({ type: "ask_started", question: trimmed });
    try {
      const answer = await this.client.ask(sessionId, trimmed);
      this.dispatch({ type: "ask_succeeded", answer });
    } catch (error) {
      this.dispatch({ type: "ask_failed", error: toErrorBody(error) });
    }
  }

  private render(): void {
    const doc = this.doc;
    this.root.replaceChildren();

    if (this.view.banner) {
      const banner = doc.createElement("div");
      banner.className = "banner";
      banner.textContent = this.view.banner;
      this.root.append(banner);
    }

    if (this.view.sessionId === null) {
      this.root.append(this.renderRolePicker());
      return;
    }

    const turns = doc.createElement("div");
    turns.className = "turns";
    for (const turn of this.view.turns) {
      turns.append(renderTurn(doc, turn, (question) => void this.ask(question)));
    }
    this.root.append(turns);
    this.root.append(this.renderComposer());
  }

  private renderRolePicker(): HTMLElement {
    const doc = this.doc;
    const picker = doc.createElement("div");
    picker.className = "role-picker";
    const prompt = doc.createElement("p");
    prompt.textContent = "Choose your role to start a session:";
    picker.append(prompt);
    for (const role of ROLES) {
      const button = doc.createElement("button");
      button.type = "button";
      button.className = "role-option";
      button.dataset.role = role;
      button.textContent = role.replaceAll("_", " ");
      button.addEventListener("click", () => void this.selectRole(role));
      picker.append(button);
    }
    return picker;
  }

  private renderComposer(): HTMLElement {
    const doc = this.doc;
    const form = doc.createElement("form");
    form.className = "composer";
    const input = doc.createElement("input");
    input.type = "text";
    input.name = "question";
    input.placeholder = "Ask about a contract…";
    const send = doc.createElement("button");
    send.type = "submit";
    send.textContent = "send";
    const busy = !canSend(this.view);
    input.disabled = busy;
    send.disabled = busy || input.value.trim() === "";
    input.addEventListener("input", () => {
      send.disabled = !canSend(this.view) || input.value.trim() === "";
    });
    form.append(input, send);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const question = input.value;
      input.value = "";
      void this.ask(question);
    });
    return form;
  }
}

function toErrorBody(error: unknown) {
  if (error instanceof ApiError) {
    return error.body;
  }
  return { code: "internal", message: error instanceof Error ? error.message : String(error) };
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  return new App(root, new ApiClient(baseUrl));
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app") as HTMLElement);
}
