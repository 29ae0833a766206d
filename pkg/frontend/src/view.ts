/** DOM rendering. Pure functions from view models to elements; user text
 * always goes through textContent, never markup. */

import type { KbPanelModel } from "./kbpanel.js";
import { optionSubmission, type UiTurnView } from "./state.js";
import type { OptionEntry } from "./types.js";

export type SubmitFn = (text: string) => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function optionButtons(options: OptionEntry[], active: boolean, submit: SubmitFn): HTMLElement {
  const list = el("div", "options");
  for (const option of options) {
    const button = el("button", "option-button", `option-${option.index}. ${option.label}`);
    button.dataset.index = String(option.index);
    button.disabled = !active;
    button.addEventListener("click", () => submit(optionSubmission(option)));
    list.appendChild(button);
  }
  return list;
}

export function renderConversation(
  container: HTMLElement,
  views: UiTurnView[],
  submit: SubmitFn,
): void {
  container.replaceChildren();
  for (const view of views) {
    const row = el("div", `turn ${view.side}`);
    row.dataset.seq = String(view.seq);
    if (view.kind === "options" && view.options) {
      const bubble = el("div", "bubble agent-bubble", view.text);
      bubble.appendChild(optionButtons(view.options, view.active ?? false, submit));
      row.appendChild(bubble);
    } else if (view.kind === "executeBadge") {
      const badge = el("div", "execute-badge");
      badge.appendChild(el("span", "badge-icon", "✓"));
      badge.appendChild(el("code", "badge-code", view.badge ?? view.text));
      row.appendChild(badge);
    } else if (view.kind === "argPrompt") {
      row.appendChild(el("div", "bubble agent-bubble arg-prompt", view.text));
    } else {
      const cls = view.side === "user" ? "bubble user-bubble" : "bubble agent-bubble";
      row.appendChild(el("div", cls, view.text));
    }
    container.appendChild(row);
  }
  container.scrollTop = container.scrollHeight;
}

export function renderKbPanel(container: HTMLElement, model: KbPanelModel): void {
  container.replaceChildren();
  if (model.offline) {
    container.appendChild(el("div", "offline-banner", "service unreachable"));
    return;
  }
  const head = el("div", "kb-head", `knowledge base v${model.kbVersion}`);
  head.appendChild(el("span", "kb-learned", ` · ${model.learnedTotal} learned`));
  container.appendChild(head);
  for (const row of model.rows) {
    const card = el("div", "kb-row");
    card.appendChild(el("div", "kb-api", row.signature));
    card.appendChild(el("div", "kb-desc", row.description));
    card.appendChild(
      el("div", "kb-counts", `${row.authored} authored + ${row.learned} learned`),
    );
    container.appendChild(card);
  }
}
