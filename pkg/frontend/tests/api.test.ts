import { describe, expect, it } from "vitest";

import { StationClient, StationHttpError } from "../src/api.js";
import type { TelemetryDoc } from "../src/types.js";

type FetchCall = { url: string; init?: RequestInit };

function fetchReturning(body: string, status = 200, calls: FetchCall[] = []) {
  const impl = (input: string | URL | Request, init?: RequestInit) => {
    calls.push({ url: String(input), init });
    return Promise.resolve(new Response(body, { status }));
  };
  return impl as typeof fetch;
}

/** Stream `chunks` as the /telemetry body, byte boundaries as given. */
function fetchStreaming(chunks: string[]) {
  const impl = () => {
    const encoder = new TextEncoder();
    const stream = new ReadableStream<Uint8Array>({
      start(controller) {
        for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
        controller.close();
      },
    });
    return Promise.resolve(new Response(stream, { status: 200 }));
  };
  return impl as typeof fetch;
}

describe("request shapes", () => {
  it("wraps plan documents in a plan envelope", async () => {
    const calls: FetchCall[] = [];
    const ackBody = JSON.stringify({ request_id: "r1", ok: true, seq: 1, sim_time: 0 });
    const client = new StationClient("http://x", fetchReturning(ackBody, 200, calls));
    await client.createPlan({ type: "line" });
    expect(calls[0]!.url).toBe("http://x/plans");
    expect(JSON.parse(calls[0]!.init!.body as string)).toEqual({ plan: { type: "line" } });
  });

  it("addresses mission commands by id", async () => {
    const calls: FetchCall[] = [];
    const ackBody = JSON.stringify({ request_id: "r1", ok: true, seq: 1, sim_time: 0 });
    const client = new StationClient("", fetchReturning(ackBody, 200, calls));
    await client.abort("m0002");
    await client.loiter("m0002");
    await client.validatePlan("p0003");
    expect(calls.map((c) => c.url)).toEqual([
      "/missions/m0002/abort",
      "/missions/m0002/loiter",
      "/plans/p0003/validate",
    ]);
  });

  it("keeps quickview's raw text alongside the parsed document", async () => {
    const body = JSON.stringify({ mission_id: "m0001", record: { t: 1.5 } });
    const client = new StationClient("", fetchReturning(body));
    const res = await client.quickview("m0001", 1.5);
    expect(res.text).toBe(body);
    expect(res.doc.mission_id).toBe("m0001");
  });
});

describe("error mapping", () => {
  it("extracts the code from a rejected command's ack detail", async () => {
    const body = JSON.stringify({
      detail: {
        request_id: "r9",
        ok: false,
        seq: 9,
        sim_time: 3.2,
        error: { code: "ValidationFailed", message: "2 violation(s)" },
      },
    });
    const client = new StationClient("", fetchReturning(body, 422));
    const err = await client.launch("p0001").catch((e) => e as StationHttpError);
    expect(err).toBeInstanceOf(StationHttpError);
    expect(err.status).toBe(422);
    expect(err.code).toBe("ValidationFailed");
    expect(err.message).toContain("violation");
  });

  it("extracts the code from a query endpoint's error detail", async () => {
    const body = JSON.stringify({
      detail: { error: { code: "UnknownMission", message: "no mission m9" } },
    });
    const client = new StationClient("", fetchReturning(body, 404));
    const err = await client.quickview("m9", 0).catch((e) => e as StationHttpError);
    expect(err.code).toBe("UnknownMission");
    expect(err.status).toBe(404);
  });

  it("keeps non-JSON error bodies as the message", async () => {
    const client = new StationClient("", fetchReturning("boom", 500));
    const err = await client.status().catch((e) => e as StationHttpError);
    expect(err.code).toBe("HttpError");
    expect(err.message).toBe("boom");
  });
});

describe("telemetry stream", () => {
  const docs: TelemetryDoc[] = [
    { sim_time: 0.1, seq: 1, connection: "surface", mission_id: null },
    { sim_time: 0.2, seq: 2, connection: "surface", mission_id: "m0001" },
    { sim_time: 0.3, seq: 3, connection: "submerged", mission_id: "m0001" },
  ];

  it("parses frames across arbitrary chunk boundaries", async () => {
    const ndjson = docs.map((d) => JSON.stringify(d) + "\n").join("");
    // split mid-token to prove reassembly
    const chunks = [ndjson.slice(0, 17), ndjson.slice(17, 63), ndjson.slice(63)];
    const client = new StationClient("", fetchStreaming(chunks));
    const seen: TelemetryDoc[] = [];
    const count = await client.streamTelemetry((d) => seen.push(d));
    expect(count).toBe(3);
    expect(seen).toEqual(docs);
  });

  it("skips keepalive lines", async () => {
    const lines = [
      JSON.stringify({ keepalive: true }),
      JSON.stringify(docs[0]),
      JSON.stringify({ keepalive: true }),
      JSON.stringify(docs[1]),
      "",
    ].join("\n");
    const client = new StationClient("", fetchStreaming([lines]));
    const seen: TelemetryDoc[] = [];
    const count = await client.streamTelemetry((d) => seen.push(d));
    expect(count).toBe(2);
    expect(seen.map((d) => d.seq)).toEqual([1, 2]);
  });

  it("passes the frame limit through as a query parameter", async () => {
    const calls: FetchCall[] = [];
    const impl = ((input: string | URL | Request) => {
      calls.push({ url: String(input) });
      return Promise.resolve(new Response("", { status: 200 }));
    }) as typeof fetch;
    const client = new StationClient("http://x", impl);
    await client.streamTelemetry(() => {}, { limit: 25 });
    expect(calls[0]!.url).toBe("http://x/telemetry?limit=25");
  });
});
