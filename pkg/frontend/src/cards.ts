/** DOM rendering for candidate cards: two record panes side by side, every
 * displayed value with its source-institution badge, verdict buttons, the
 * associative kind picker, and the preferred-title picker. */

import type { AssociativeKind, CandidateCard, RecordView, TitlePayload, VerdictChoice } from "./types.js";
import type { CardState } from "./queue.js";

export const ASSOCIATIVE_KINDS: AssociativeKind[] = [
  "copy_of",
  "preparatory_for",
  "part_of",
  "related",
];

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function badge(institution: string): HTMLElement {
  const node = el("span", "badge", institution);
  node.title = `recorded by ${institution}`;
  return node;
}

function renderPane(view: RecordView, side: string): HTMLElement {
  const pane = el("div", `pane pane-${side}`);
  pane.dataset.ref = view.ref;
  if (view.kind === "entity") {
    const row = el("div", "field");
    row.append(el("span", "value", view.ref));
    row.append(badge(view.authority ?? "unknown"));
    pane.append(row);
    return pane;
  }
  const title = el("div", "pane-title", view.display_title?.text ?? view.ref);
  title.append(badge(view.institution ?? "unknown"));
  pane.append(title);
  for (const field of view.fields ?? []) {
    const row = el("div", "field");
    row.dataset.field = field.name;
    row.append(el("span", "name", field.name));
    const value = el("span", "value", field.value);
    if (field.qualifier && field.qualifier !== "certain") {
      value.classList.add(`qualifier-${field.qualifier}`);
    }
    row.append(value);
    row.append(badge(field.institution));
    pane.append(row);
  }
  return pane;
}

export interface TitleChoiceState {
  selection?: TitlePayload;
}

/** Title picker: mark one of the existing titles or type a new one; leaving
 * both alone means no preferred_title field in the decision payload. */
export function renderTitlePicker(card: CandidateCard, state: TitleChoiceState): HTMLElement {
  const box = el("div", "title-picker");
  const titles = [
    ...(card.left_view.all_titles ?? []),
    ...(card.right_view.all_titles ?? []),
  ];
  for (const title of titles) {
    const option = el("button", "title-option", title.text);
    option.setAttribute("type", "button");
    option.append(badge(title.institution));
    option.addEventListener("click", () => {
      state.selection = { mark: title.text };
      box.querySelectorAll(".title-option").forEach((b) => b.classList.remove("chosen"));
      option.classList.add("chosen");
    });
    box.append(option);
  }
  const input = el("input", "title-new") as HTMLInputElement;
  input.placeholder = "or create a new title";
  input.addEventListener("input", () => {
    state.selection = input.value ? { create: input.value } : undefined;
    box.querySelectorAll(".title-option").forEach((b) => b.classList.remove("chosen"));
  });
  box.append(input);
  return box;
}

export interface CardHandlers {
  onDecision: (candidateId: string, choice: VerdictChoice) => void;
  onRetry: (candidateId: string) => void;
}

export function renderCard(state: CardState, handlers: CardHandlers): HTMLElement {
  const { card } = state;
  const root = el("article", "candidate-card");
  root.dataset.candidateId = card.id;

  const header = el("header", "card-header");
  header.append(el("span", "score", `score ${card.score.toFixed(2)}`));
  header.append(el("span", "confidence", card.confidence));
  root.append(header);

  const panes = el("div", "panes");
  panes.append(renderPane(card.left_view, "left"));
  panes.append(renderPane(card.right_view, "right"));
  root.append(panes);

  const titleState: TitleChoiceState = {};
  root.append(renderTitlePicker(card, titleState));

  const actions = el("div", "actions");
  const accept = el("button", "accept", "accept equivalent");
  accept.addEventListener("click", () =>
    handlers.onDecision(card.id, {
      verdict: "accept_equivalent",
      preferredTitle: titleState.selection,
    }),
  );
  actions.append(accept);

  const associative = el("button", "associative", "associative…");
  const kindPicker = el("div", "kind-picker hidden");
  for (const kind of ASSOCIATIVE_KINDS) {
    const option = el("button", `kind kind-${kind}`, kind.replace("_", " "));
    option.addEventListener("click", () =>
      handlers.onDecision(card.id, { verdict: "accept_associative", kind }),
    );
    kindPicker.append(option);
  }
  associative.addEventListener("click", () => kindPicker.classList.toggle("hidden"));
  actions.append(associative);
  actions.append(kindPicker);

  const reject = el("button", "reject", "reject");
  reject.addEventListener("click", () => handlers.onDecision(card.id, { verdict: "reject" }));
  actions.append(reject);

  const defer = el("button", "defer", "defer");
  defer.addEventListener("click", () => handlers.onDecision(card.id, { verdict: "defer" }));
  actions.append(defer);
  root.append(actions);

  if (state.inFlight) {
    root.classList.add("in-flight");
  }
  if (state.retryable) {
    root.classList.add("failed");
    const retryBox = el("div", "retry-box", state.error ?? "submission failed");
    const retry = el("button", "retry", "retry");
    retry.addEventListener("click", () => handlers.onRetry(card.id));
    retryBox.append(retry);
    root.append(retryBox);
  }
  return root;
}

export function renderQueue(
  container: HTMLElement,
  cards: CardState[],
  handlers: CardHandlers,
): void {
  container.replaceChildren();
  if (cards.length === 0) {
    container.append(el("p", "empty-state", "No candidates waiting for review."));
    return;
  }
  for (const state of cards) {
    container.append(renderCard(state, handlers));
  }
}
