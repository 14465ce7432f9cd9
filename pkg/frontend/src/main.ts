// Entry point: mount the chat app and keep the session id in the URL
// fragment so a reload (or a shared link) resumes the same transcript.

import { ApiClient } from "./api.js";
import { API_BASE } from "./config.js";
import { ChatStore } from "./state.js";
import { createChatApp } from "./ui.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const api = new ApiClient(API_BASE);
const store = new ChatStore(api);
createChatApp(root, store);

store.subscribe((view) => {
  if (view.sessionId && window.location.hash.slice(1) !== view.sessionId) {
    window.history.replaceState(null, "", `#${view.sessionId}`);
  }
});

const resumeId = window.location.hash.slice(1) || undefined;
store.init(resumeId).catch((err: unknown) => {
  const message = err instanceof Error ? err.message : String(err);
  const failure = document.createElement("div");
  failure.className = "boot-error";
  failure.textContent = `could not reach ${API_BASE}: ${message}`;
  root.prepend(failure);
});
