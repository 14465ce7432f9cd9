import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatStore } from "../src/state.js";
import { ChatApp, createChatApp } from "../src/ui.js";
import { FakeServer } from "./fake_server.js";

let server: FakeServer;
let store: ChatStore;
let app: ChatApp;
let root: HTMLElement;

beforeEach(async () => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  server = new FakeServer();
  store = new ChatStore(new ApiClient("http://fake.test", server.fetch));
  app = createChatApp(root, store);
  await store.init();
});

function input(): HTMLInputElement {
  return root.querySelector<HTMLInputElement>(".composer-input")!;
}

function sendButton(): HTMLButtonElement {
  return root.querySelector<HTMLButtonElement>(".send")!;
}

function type(text: string): void {
  const field = input();
  field.value = text;
  field.dispatchEvent(new Event("input", { bubbles: true }));
}

function submit(): void {
  root
    .querySelector("form.composer")!
    .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

function bubbles(): HTMLElement[] {
  return [...root.querySelectorAll<HTMLElement>(".bubble:not(.typing)")];
}

async function settled(): Promise<void> {
  for (let i = 0; i < 400; i++) {
    if (!store.view.pending) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
  throw new Error("store never left pending");
}

describe("composer", () => {
  it("disables send while the input is empty and issues no request", () => {
    expect(sendButton().disabled).toBe(true);
    const before = server.requests.length;

    submit();

    expect(server.requests.length).toBe(before);
    expect(bubbles()).toEqual([]);
  });

  it("enables send once text is typed", () => {
    type("hello");
    expect(sendButton().disabled).toBe(false);

    type("   ");
    expect(sendButton().disabled).toBe(true);
  });

  it("clears the input after a send", async () => {
    server.replies = ["ok"];
    type("question");

    submit();
    await settled();

    expect(input().value).toBe("");
  });
});

describe("message flow", () => {
  it("renders exactly two new bubbles and a sources list per round-trip", async () => {
    server.replies = ["the palace sits in Jongno-gu"];
    server.hits = [{ main_key: "1", score: 0.2928 }];
    server.names.set("1", "Gyeongbokgung Palace");

    type("where is the palace?");
    submit();
    await settled();

    const rendered = bubbles();
    expect(rendered.length).toBe(2);
    expect(rendered[0]!.classList.contains("user")).toBe(true);
    expect(rendered[0]!.textContent).toContain("where is the palace?");
    expect(rendered[1]!.classList.contains("assistant")).toBe(true);
    expect(rendered[1]!.textContent).toContain("the palace sits in Jongno-gu");

    const sources = rendered[1]!.querySelector(".sources")!;
    expect(sources.querySelector("summary")!.textContent).toBe("Sources (1)");
    const items = [...sources.querySelectorAll("li")].map((li) => li.textContent);
    expect(items).toEqual(["#1 Gyeongbokgung Palace — 0.2928"]);
  });

  it("shows the optimistic bubble and a typing indicator while pending", async () => {
    server.replies = ["done"];
    const release = server.hold();
    type("slow question");
    submit();

    expect(bubbles().length).toBe(1); // just the optimistic user bubble
    expect(root.querySelector(".bubble.typing")).not.toBeNull();
    expect(input().disabled).toBe(true);

    release();
    await settled();

    expect(root.querySelector(".bubble.typing")).toBeNull();
    expect(input().disabled).toBe(false);
  });

  it("renders a retry affordance on failure and recovers when clicked", async () => {
    server.failNext("network");
    server.replies = ["recovered"];
    type("flaky");
    submit();
    await settled();

    const banner = root.querySelector<HTMLElement>(".error-banner")!;
    expect(banner.hidden).toBe(false);
    const retry = root.querySelector<HTMLButtonElement>(".retry")!;
    expect(retry.hidden).toBe(false);

    retry.click();
    await settled();

    expect(root.querySelector<HTMLElement>(".error-banner")!.hidden).toBe(true);
    expect(bubbles().map((b) => b.textContent)).toEqual(["flaky", "recovered"]);
  });
});

describe("suggestion chips", () => {
  async function seedChips(): Promise<void> {
    store.setGuideMe(true);
    server.replies = ["seed answer", "Chip one?\nChip two?\nChip three?", "chip reply"];
    type("seed");
    submit();
    await settled();
    store.setGuideMe(false);
  }

  it("renders one chip per suggestion", async () => {
    await seedChips();

    const chips = [...root.querySelectorAll<HTMLButtonElement>(".chip")];
    expect(chips.map((chip) => chip.textContent)).toEqual([
      "Chip one?",
      "Chip two?",
      "Chip three?",
    ]);
  });

  it("sends the chip label verbatim as the next user turn and clears the chips", async () => {
    await seedChips();

    root.querySelectorAll<HTMLButtonElement>(".chip")[1]!.click();
    await settled();

    const posts = server.postRequests();
    expect(posts[posts.length - 1]!.body?.["text"]).toBe("Chip two?");
    const rendered = bubbles();
    expect(rendered[rendered.length - 2]!.textContent).toBe("Chip two?");
    expect(root.querySelectorAll(".chip").length).toBe(0);
  });

  it("mirrors the guide-me toggle into the store", () => {
    const toggle = root.querySelector<HTMLInputElement>(".guide-toggle")!;
    expect(store.view.guideMe).toBe(false);

    toggle.checked = true;
    toggle.dispatchEvent(new Event("change", { bubbles: true }));

    expect(store.view.guideMe).toBe(true);
  });
});
