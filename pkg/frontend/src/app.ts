/** Browser entry point. Everything interesting lives in the controller and
 * the render module; this file only wires the document to them. */

import { SessionController } from "./controller.js";
import { renderApp } from "./render.js";
import { Store } from "./store.js";
import { ServiceClient } from "./transport.js";

function serviceUrlFromLocation(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? window.location.origin;
}

function sessionFromLocation(): "new" | { sessionId: string } {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  return sessionId === null || sessionId === "new" ? "new" : { sessionId };
}

export function boot(root: HTMLElement): SessionController {
  const client = new ServiceClient(
    serviceUrlFromLocation(),
    (url, init) => fetch(url, init),
    (url) => new EventSource(url),
  );
  const store = new Store();
  const controller = new SessionController(client, store);

  store.subscribe((state) => {
    root.innerHTML = renderApp(state, (path) => controller.artifactHref(path));
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (form.dataset["action"] !== "submit-query") return;
    event.preventDefault();
    const field = form.querySelector<HTMLTextAreaElement>("textarea[name=query]");
    if (field === null || field.value.trim() === "") return;
    void controller.submitQuery(field.value.trim());
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (target === null) return;
    switch (target.dataset["action"]) {
      case "retry":
        void controller.retry();
        break;
      case "stop":
        void controller.stop();
        break;
      case "preview":
        void controller.openPreview(target.dataset["path"] ?? "");
        break;
      case "download": {
        event.preventDefault();
        const path = target.dataset["path"] ?? "";
        window.open(controller.artifactHref(path), "_blank");
        break;
      }
      case "close-preview":
        controller.closePreview();
        break;
    }
  });

  const target = sessionFromLocation();
  void controller.connect(target).then(() => {
    const id = controller.sessionId;
    if (id !== null && target === "new") {
      const url = new URL(window.location.href);
      url.searchParams.set("session", id);
      // keep the session id in the URL so a reload reattaches to it
      window.history.replaceState(null, "", url.toString());
    }
  });
  return controller;
}

declare global {
  interface Window {
    histoagentUi?: SessionController;
  }
}

const rootElement = document.getElementById("app");
if (rootElement !== null) {
  window.histoagentUi = boot(rootElement);
}
