/** Bootstrap: session setup (server URL, institution, reviewer, token entered
 * once per session), then wire the queue and facet views together. */

import { ApiClient } from "./api.js";
import { renderQueue } from "./cards.js";
import { renderFacetTree } from "./facets.js";
import { QueueController } from "./queue.js";

interface Session {
  baseUrl: string;
  institution: string;
  reviewer: string;
  token: string;
}

const SESSION_KEY = "concordia-session";

function loadSession(): Session | null {
  const raw = sessionStorage.getItem(SESSION_KEY);
  return raw ? (JSON.parse(raw) as Session) : null;
}

function saveSession(session: Session): void {
  sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
}

function sessionForm(onReady: (session: Session) => void): HTMLElement {
  const form = document.createElement("form");
  form.className = "session-form";
  form.innerHTML = `
    <label>server <input name="baseUrl" value="${window.location.origin}"></label>
    <label>institution <input name="institution" placeholder="zeri"></label>
    <label>reviewer <input name="reviewer" placeholder="your id"></label>
    <label>token <input name="token" type="password" placeholder="(blank when open)"></label>
    <button type="submit">start reviewing</button>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const session: Session = {
      baseUrl: String(data.get("baseUrl") || window.location.origin),
      institution: String(data.get("institution") || ""),
      reviewer: String(data.get("reviewer") || "anonymous"),
      token: String(data.get("token") || ""),
    };
    if (!session.institution) {
      return;
    }
    saveSession(session);
    onReady(session);
  });
  return form;
}

async function start(root: HTMLElement, session: Session): Promise<void> {
  root.replaceChildren();
  const api = new ApiClient(session.baseUrl, session.token);
  const queue = new QueueController(api, session.institution, session.reviewer);

  const layout = document.createElement("div");
  layout.className = "layout";
  const facetsBox = document.createElement("aside");
  facetsBox.id = "facets";
  const queueBox = document.createElement("main");
  queueBox.id = "queue";
  layout.append(facetsBox, queueBox);
  root.append(layout);

  const handlers = {
    onDecision: (candidateId: string, choice: Parameters<QueueController["submit"]>[1]) => {
      void queue.submit(candidateId, choice);
    },
    onRetry: (candidateId: string) => {
      void queue.retry(candidateId);
    },
  };
  queue.onChange = () => renderQueue(queueBox, queue.cards, handlers);

  try {
    await queue.load();
    renderFacetTree(facetsBox, await api.facets());
  } catch (err) {
    const message = document.createElement("p");
    message.className = "error";
    message.textContent = `could not reach the review service: ${err}`;
    root.append(message);
  }
}

export function init(root: HTMLElement): void {
  const session = loadSession();
  if (session) {
    void start(root, session);
    return;
  }
  root.replaceChildren(
    sessionForm((ready) => {
      void start(root, ready);
    }),
  );
}

const mount = document.getElementById("concordia-root");
if (mount) {
  init(mount);
}
