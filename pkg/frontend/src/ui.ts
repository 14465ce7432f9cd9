// DOM layer. Builds the chat skeleton once, then re-renders the dynamic
// regions (log, chips, error banner, controls) on every store emit. All user
// and server text goes through textContent, never innerHTML.

import { ChatStore, UiMessage, UiSessionView } from "./state.js";

export interface ChatApp {
  readonly root: HTMLElement;
  dispose(): void;
}

export function createChatApp(root: HTMLElement, store: ChatStore): ChatApp {
  root.classList.add("chat-app");
  root.replaceChildren();

  const sessionLine = el("div", "session-line");
  const log = el("div", "chat-log");
  const banner = el("div", "error-banner");
  const errorText = el("span", "error-text");
  const retryButton = el("button", "retry");
  retryButton.type = "button";
  retryButton.textContent = "Retry";
  banner.append(errorText, retryButton);
  banner.hidden = true;

  const chips = el("div", "suggestions");

  const form = el("form", "composer");
  const input = el("input", "composer-input");
  input.type = "text";
  input.placeholder = "Ask about Seoul's heritage…";
  input.autocomplete = "off";
  const sendButton = el("button", "send");
  sendButton.type = "submit";
  sendButton.textContent = "Send";
  const toggleLabel = el("label", "guide-label");
  const toggle = el("input", "guide-toggle");
  toggle.type = "checkbox";
  toggleLabel.append(toggle, document.createTextNode(" guide me"));
  form.append(input, sendButton, toggleLabel);

  root.append(sessionLine, log, banner, chips, form);

  let view = store.view;

  const syncSendButton = () => {
    sendButton.disabled = view.pending || input.value.trim() === "";
  };

  const render = (next: UiSessionView) => {
    view = next;
    sessionLine.textContent = next.sessionId ? `session ${next.sessionId}` : "connecting…";

    log.replaceChildren(...next.messages.map(renderMessage));
    if (next.pending) {
      const typing = el("div", "bubble");
      typing.classList.add("assistant", "typing");
      typing.textContent = "…";
      log.append(typing);
    }
    log.scrollTop = log.scrollHeight;

    chips.replaceChildren(
      ...next.suggestions.map((text, index) => {
        const chip = el("button", "chip");
        chip.type = "button";
        chip.textContent = text;
        chip.disabled = next.pending;
        chip.addEventListener("click", () => void store.clickSuggestion(index));
        return chip;
      })
    );

    banner.hidden = next.errorText === null;
    errorText.textContent = next.errorText ?? "";
    retryButton.hidden = next.failedText === null;
    retryButton.disabled = next.pending;

    input.disabled = next.pending;
    toggle.checked = next.guideMe;
    syncSendButton();
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || view.pending) {
      return;
    }
    input.value = "";
    void store.send(text);
  });
  input.addEventListener("input", syncSendButton);
  retryButton.addEventListener("click", () => void store.retry());
  toggle.addEventListener("change", () => store.setGuideMe(toggle.checked));

  const unsubscribe = store.subscribe(render);
  render(store.view);

  return {
    root,
    dispose: () => {
      unsubscribe();
      root.replaceChildren();
    },
  };
}

function renderMessage(message: UiMessage): HTMLElement {
  const bubble = el("div", "bubble");
  bubble.classList.add(message.role);
  const body = el("div", "bubble-text");
  body.textContent = message.text;
  bubble.append(body);
  if (message.hits && message.hits.length > 0) {
    bubble.append(renderSources(message));
  }
  return bubble;
}

function renderSources(message: UiMessage): HTMLElement {
  const details = el("details", "sources");
  const summary = document.createElement("summary");
  summary.textContent = `Sources (${message.hits!.length})`;
  const list = document.createElement("ul");
  for (const hit of message.hits!) {
    const item = document.createElement("li");
    const label = hit.name ? `#${hit.main_key} ${hit.name}` : `#${hit.main_key}`;
    item.textContent = `${label} — ${hit.score.toFixed(4)}`;
    list.append(item);
  }
  details.append(summary, list);
  return details;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
