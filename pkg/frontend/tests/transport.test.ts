import { describe, expect, it } from "vitest";

import type { StreamEvent } from "../src/contract.js";
import { ServiceClient, ServiceError } from "../src/transport.js";
import { FakeService } from "./fake_service.js";
import { SERVICE_URL } from "./helpers.js";

function makeClient(service: FakeService): ServiceClient {
  return new ServiceClient(SERVICE_URL, service.fetch, service.eventSource);
}

describe("service client", () => {
  it("carries the wire error kind and status on failures", async () => {
    const service = new FakeService();
    const client = makeClient(service);
    const failure = await client.getSession("nope").catch((error: unknown) => error);
    expect(failure).toBeInstanceOf(ServiceError);
    expect((failure as ServiceError).kind).toBe("UnknownSession");
    expect((failure as ServiceError).status).toBe(404);
  });

  it("maps a 409 on post to SessionBusy", async () => {
    const service = new FakeService();
    const client = makeClient(service);
    const session = await client.createSession();
    service.forceBusyOnce = true;
    const failure = await client.postQuery(session.id, "q").catch((error: unknown) => error);
    expect((failure as ServiceError).kind).toBe("SessionBusy");
    expect((failure as ServiceError).status).toBe(409);
  });

  it("delivers stream events in order and resolves with the summary", async () => {
    const service = new FakeService({
      script: [
        [
          { thought: "a", code: "print(1)", observation: "1" },
          { thought: "b", code: "final_answer(1)", observation: "1", is_final: true },
        ],
      ],
    });
    const client = makeClient(service);
    const session = await client.createSession();
    const runId = await client.postQuery(session.id, "go");

    const seen: StreamEvent[] = [];
    const summary = await client.streamRun(session.id, runId, (event) => seen.push(event));
    expect(seen.map((event) => event.kind)).toEqual(["step", "step", "summary"]);
    expect(summary.steps).toBe(2);
    expect(summary.answered).toBe(true);
    // the summary handed to the promise is the same one sent to onEvent
    expect(seen[2]!.payload).toEqual(summary);
  });

  it("rejects the stream promise for an unknown run", async () => {
    const service = new FakeService();
    const client = makeClient(service);
    const session = await client.createSession();
    const failure = await client
      .streamRun(session.id, "r9999", () => undefined)
      .catch((error: unknown) => error);
    expect(failure).toBeInstanceOf(ServiceError);
    expect((failure as ServiceError).kind).toBe("StreamError");
  });

  it("builds session urls without doubled slashes", async () => {
    const service = new FakeService();
    const client = new ServiceClient(SERVICE_URL + "/", service.fetch, service.eventSource);
    const session = await client.createSession();
    expect(session.id).toBe("s0001");
  });
});
