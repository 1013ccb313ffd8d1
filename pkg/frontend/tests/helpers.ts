import { SessionController } from "../src/controller.js";
import { renderApp } from "../src/render.js";
import { Store } from "../src/store.js";
import { ServiceClient } from "../src/transport.js";
import { FakeService } from "./fake_service.js";

export const SERVICE_URL = "http://svc.test";

export interface App {
  client: ServiceClient;
  store: Store;
  controller: SessionController;
}

/** Fresh client + store + controller over a shared fake service. Creating a
 * second app on the same fake is how tests model a page reload. */
export function makeApp(service: FakeService): App {
  const client = new ServiceClient(SERVICE_URL, service.fetch, service.eventSource);
  const store = new Store();
  const controller = new SessionController(client, store);
  return { client, store, controller };
}

export function rendered(app: App): string {
  return renderApp(app.store.state, (path) => app.controller.artifactHref(path));
}

export async function waitFor(
  predicate: () => boolean,
  what = "condition",
): Promise<void> {
  for (let attempt = 0; attempt < 500; attempt += 1) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
  throw new Error(`timed out waiting for ${what}`);
}

export function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}
