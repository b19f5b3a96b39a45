/** End-to-end: boot a real control station and drive the full operator
 * workflow over HTTP — plan, validate, launch, watch live, review.
 *
 * The station runs time-compressed so a full survey finishes in seconds.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { StationClient, StationHttpError } from "../src/api.js";
import { liveFlow, planAndLaunchFlow, reviewFlow, type View } from "../src/flows.js";
import { parseTrack, type PlanShape } from "../src/mapview.js";
import { UiMissionForm } from "../src/planform.js";
import type { ReviewValues } from "../src/review.js";
import { type LiveView, UiSessionState } from "../src/session.js";
import type { PlanDoc, SitePlanDoc } from "../src/types.js";

const TIME_SCALE = 40;

let child: ChildProcess | null = null;
let tmp: string | null = null;
let base = "";
let client: StationClient;
let childOutput = "";

class RecordingView implements View {
  shapes: PlanShape[] = [];
  docs: PlanDoc[] = [];
  violations: string[][] = [];
  phases: (string | null)[] = [];
  liveViews: LiveView[] = [];
  reviews: { values: ReviewValues; raw: string }[] = [];
  banners: string[] = [];

  showPlanPreview(shape: PlanShape, doc: PlanDoc): void {
    this.shapes.push(shape);
    this.docs.push(doc);
  }
  showViolations(violations: string[]): void {
    this.violations.push(violations);
  }
  showPhase(phase: string | null): void {
    this.phases.push(phase);
  }
  showLive(view: LiveView): void {
    this.liveViews.push(view);
  }
  showReview(values: ReviewValues, raw: string): void {
    this.reviews.push({ values, raw });
  }
  showBanner(message: string): void {
    this.banners.push(message);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForStation(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    if (child && child.exitCode !== null) {
      throw new Error(`station exited early (${child.exitCode}):\n${childOutput}`);
    }
    try {
      const resp = await fetch(`${url}/status`);
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`station not reachable in ${timeoutMs} ms:\n${childOutput}`);
    }
    await sleep(150);
  }
}

beforeAll(async () => {
  const port = 20000 + Math.floor(Math.random() * 20000);
  base = `http://127.0.0.1:${port}`;
  tmp = mkdtempSync(join(tmpdir(), "tablet-e2e-"));
  const cfgPath = join(tmp, "station.yaml");
  writeFileSync(cfgPath, `station:\n  host: "127.0.0.1"\n  port: ${port}\n`);

  child = spawn(
    "python3",
    ["-m", "seashark.cli", "--config", cfgPath, "--scenario", "flat",
     "--time-scale", String(TIME_SCALE)],
    { env: { ...process.env, PYTHONUNBUFFERED: "1" }, stdio: ["ignore", "pipe", "pipe"] },
  );
  child.stdout?.on("data", (d: Buffer) => (childOutput += d.toString()));
  child.stderr?.on("data", (d: Buffer) => (childOutput += d.toString()));

  await waitForStation(base, 40_000);
  client = new StationClient(base);
});

afterAll(async () => {
  if (child && child.exitCode === null) {
    child.kill("SIGTERM");
    await new Promise<void>((resolve) => {
      const t = setTimeout(() => {
        child?.kill("SIGKILL");
        resolve();
      }, 5000);
      child?.on("exit", () => {
        clearTimeout(t);
        resolve();
      });
    });
  }
  if (tmp) rmSync(tmp, { recursive: true, force: true });
});

let missionId = "";

describe("operator workflow against a live station", () => {
  it("reports the scenario over /status", async () => {
    const status = await client.status();
    expect(status.scenario).toBe("flat");
    expect(status.settings.time_scale).toBe(TIME_SCALE);
    expect(status.plans).toContain("survey");
  });

  it("blocks launch when the service rejects the plan", async () => {
    const form = new UiMissionForm("site");
    form.setField("depth_m", 35); // basin is 20 m deep
    const view = new RecordingView();
    const session = new UiSessionState();
    const launched = await planAndLaunchFlow(client, form, session, view);
    expect(launched).toBeNull();
    expect(form.submitEnabled).toBe(false);
    expect(form.validation).toBe("failed");
    expect(form.violations.length).toBeGreaterThan(0);
    expect(view.banners.some((b) => b.includes("not launchable"))).toBe(true);
  });

  it("validates, previews, and launches a survey", async () => {
    const form = new UiMissionForm("site");
    form.setField("num_lines", 3);
    form.setField("line_length_m", 60);
    form.setField("spacing_m", 12);
    form.setField("orientation_deg", 90);
    form.setField("depth_m", 5);
    const view = new RecordingView();
    const session = new UiSessionState();

    const launched = await planAndLaunchFlow(client, form, session, view);
    expect(launched).not.toBeNull();
    missionId = launched!;
    expect(session.activeMissionId).toBe(missionId);
    expect(view.phases).toContain("LeadIn");

    // preview has one segment per derived line, endpoints from the document
    const shape = view.shapes[view.shapes.length - 1]!;
    const doc = view.docs[view.docs.length - 1] as SitePlanDoc;
    expect(doc.type).toBe("site");
    expect(doc.lines).toHaveLength(3);
    expect(shape.segments).toHaveLength(3);
    expect(shape.segments[0]!.from).toEqual(doc.lines[0]!.start);
    expect(shape.segments[2]!.to).toEqual(doc.lines[2]!.rendezvous);
  });

  it("shows live telemetry but never a submerged position", async () => {
    const session = new UiSessionState();
    const view = new RecordingView();
    // ~60 simulated seconds: lead-in on the surface, then the dive
    const frames = await liveFlow(client, session, view, { limit: 600 });
    expect(frames).toBe(600);
    // one view per frame plus the final "link lost" render at stream end
    expect(view.liveViews).toHaveLength(601);
    expect(view.liveViews[600]!.connection).toBe("lost");

    const surfaced = view.liveViews.filter((v) => v.connection === "surface");
    const submerged = view.liveViews.filter((v) => v.connection === "submerged");
    expect(surfaced.length).toBeGreaterThan(0);
    expect(submerged.length).toBeGreaterThan(0);

    for (const v of submerged) {
      expect(v.position).toBeNull();
      expect(v.phase).toBeNull();
      expect(v.heading).toBeNull();
      expect(v.imageId).toBeNull();
    }
    expect(surfaced.some((v) => v.position !== null)).toBe(true);
    expect(surfaced.some((v) => v.phase === "LeadIn")).toBe(true);
    // the stale marker still shows the last surfaced fix
    const lastSub = submerged[submerged.length - 1]!;
    expect(lastSub.lastSurfacePosition).not.toBeNull();
    expect(lastSub.note).toContain("submerged");
  });

  it("rejects backseat lines exactly as the service says", async () => {
    const ok = await client.backseat(
      JSON.stringify({ session: "e2e", timestamp: 1.0, heading_deg: 45.0 }),
    );
    expect(ok.ok).toBe(true);

    const malformed = await client
      .backseat("not json at all")
      .catch((e) => e as StationHttpError);
    expect(malformed).toBeInstanceOf(StationHttpError);
    expect((malformed as StationHttpError).code).toBe("MalformedMessage");
    expect((malformed as StationHttpError).status).toBe(400);
  });

  it("runs the survey to completion", async () => {
    const deadline = Date.now() + 90_000;
    for (;;) {
      const summaries = await client.missions();
      const mine = summaries.find((m) => m.mission_id === missionId);
      if (mine && mine.finalized && mine.phase === "Complete") {
        expect(mine.records).toBeGreaterThan(1000);
        expect(mine.start_time).not.toBeNull();
        expect(mine.end_time).not.toBeNull();
        return;
      }
      if (Date.now() > deadline) {
        const status = await client.status();
        throw new Error(`mission not complete: ${JSON.stringify({ mine, status })}`);
      }
      await sleep(300);
    }
  });

  it("review scrubber matches the service byte for byte", async () => {
    const view = new RecordingView();
    const review = await reviewFlow(client, missionId, view);
    const [first, last] = review.range!;
    expect(first).toBeLessThan(last);
    expect(view.reviews).toHaveLength(1);

    const targets = [first, last];
    for (let i = 0; i < 22; i++) {
      targets.push(first + ((last - first) * (i + 0.5)) / 22);
    }
    for (const t of targets) {
      const res = await review.scrubTo(t);
      const direct = await fetch(
        `${base}/missions/${missionId}/quickview?t=${t}`,
      );
      expect(res.text).toBe(await direct.text());

      const rec = res.doc.record;
      expect(rec.t).toBeGreaterThanOrEqual(first);
      expect(rec.t).toBeLessThanOrEqual(Math.max(t, first));
      const values = review.displayedValues()!;
      expect(values.t).toBe(rec.t);
      expect(values.position).toBe(rec.est.pos);
      expect(values.depth).toBe(rec.frame.depth);
    }
  });

  it("overlays the reconstructed track from the export", async () => {
    const text = await client.exportText(missionId, "track");
    const track = parseTrack(text);
    expect(track.length).toBeGreaterThan(1000);
    expect(track[0]!.src).toBe("gnss");
    expect(track[track.length - 1]!.src).toBe("gnss");
    const srcs = new Set(track.map((p) => p.src));
    expect(srcs).toEqual(new Set(["gnss", "dr"]));

    const geo = await client.exportText(missionId, "geotrack");
    expect(geo).toContain("<kml");
    expect(geo).toContain("<coordinates>");
  });

  it("serves mission history for the review picker", async () => {
    const summaries = await client.missions();
    const mine = summaries.find((m) => m.mission_id === missionId)!;
    expect(mine.plan.type).toBe("site");
    expect(mine.active).toBe(false);
    const review = await reviewFlow(client, missionId, new RecordingView());
    expect(review.scrubberMin).toBe(mine.start_time);
    expect(review.scrubberMax).toBe(mine.end_time);
  });
});
