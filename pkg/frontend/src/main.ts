/** DOM wiring for the tablet UI: one map pane, one side panel.
 *
 * All state and service traffic lives in the imported modules; this file
 * only builds elements, forwards events, and paints the canvas. Rendering
 * is keep-latest: telemetry updates mark the scene dirty and a single
 * animation-frame loop repaints, so a fast stream never queues frames.
 */

import { StationClient } from "./api.js";
import { liveFlow, planAndLaunchFlow, reviewFlow, type View } from "./flows.js";
import {
  MapProjection,
  parseTrack,
  planShape,
  shapePoints,
  type PlanShape,
  type TrackPoint,
} from "./mapview.js";
import { fieldSpecs, UiMissionForm, type MissionKind } from "./planform.js";
import { frameCard, type ReviewValues } from "./review.js";
import { UiSessionState, type LiveView } from "./session.js";
import type { PlanDoc } from "./types.js";

const client = new StationClient("");
const session = new UiSessionState();
const form = new UiMissionForm("site");

// --- scene state ----------------------------------------------------------------

interface Scene {
  shape: PlanShape | null;
  track: TrackPoint[] | null;
  live: LiveView | null;
  reviewMark: [number, number] | null;
  dirty: boolean;
}

const scene: Scene = { shape: null, track: null, live: null, reviewMark: null, dirty: true };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fmt(v: number | null, digits = 1, unit = ""): string {
  return v === null ? "-" : `${v.toFixed(digits)}${unit}`;
}

// --- canvas ----------------------------------------------------------------------

const canvas = document.getElementById("map") as HTMLCanvasElement;

function scenePoints(): { lat: number; lon: number }[] {
  const pts: { lat: number; lon: number }[] = [];
  if (scene.shape) pts.push(...shapePoints(scene.shape));
  if (scene.track) pts.push(...scene.track);
  if (scene.live?.position) {
    pts.push({ lat: scene.live.position[0], lon: scene.live.position[1] });
  }
  if (scene.live?.lastSurfacePosition) {
    const [lat, lon] = scene.live.lastSurfacePosition;
    pts.push({ lat, lon });
  }
  return pts;
}

function paint(): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#0b2231";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const pts = scenePoints();
  if (pts.length === 0) {
    ctx.fillStyle = "#5b7d90";
    ctx.font = "14px sans-serif";
    ctx.fillText("no plan loaded", 16, 24);
    return;
  }
  const proj = MapProjection.fit(pts, canvas.width, canvas.height);

  if (scene.shape) {
    ctx.strokeStyle = "#58d0a5";
    ctx.lineWidth = 2;
    for (const seg of scene.shape.segments) {
      const a = proj.toPixel(seg.from);
      const b = proj.toPixel(seg.to);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    for (const circle of scene.shape.circles) {
      const c = proj.toPixel(circle.center);
      ctx.beginPath();
      ctx.arc(c.x, c.y, proj.metersToPixels(circle.radiusM), 0, 2 * Math.PI);
      ctx.stroke();
    }
    ctx.fillStyle = "#58d0a5";
    for (const a of scene.shape.anchors) {
      const p = proj.toPixel(a);
      ctx.fillRect(p.x - 3, p.y - 3, 6, 6);
    }
    if (scene.shape.rendezvous) {
      const r = proj.toPixel(scene.shape.rendezvous);
      ctx.strokeStyle = "#ffd166";
      ctx.beginPath();
      ctx.arc(r.x, r.y, 6, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  if (scene.track) {
    ctx.lineWidth = 1.5;
    let prev: { x: number; y: number } | null = null;
    for (const tp of scene.track) {
      const p = proj.toPixel(tp);
      if (prev) {
        ctx.strokeStyle = tp.src === "gnss" ? "#6fb4ff" : "#c792ea";
        ctx.beginPath();
        ctx.moveTo(prev.x, prev.y);
        ctx.lineTo(p.x, p.y);
        ctx.stroke();
      }
      prev = p;
    }
  }

  if (scene.live?.lastSurfacePosition && !scene.live.position) {
    const [lat, lon] = scene.live.lastSurfacePosition;
    const p = proj.toPixel({ lat, lon });
    ctx.strokeStyle = "#8899a6";
    ctx.setLineDash([3, 3]);
    ctx.beginPath();
    ctx.arc(p.x, p.y, 7, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#8899a6";
    ctx.font = "11px sans-serif";
    ctx.fillText(`last fix t=${fmt(scene.live.lastSurfaceTime)}`, p.x + 10, p.y);
  }

  if (scene.live?.position) {
    const [lat, lon] = scene.live.position;
    const p = proj.toPixel({ lat, lon });
    ctx.fillStyle = "#ff6b6b";
    ctx.beginPath();
    ctx.arc(p.x, p.y, 5, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (scene.reviewMark) {
    const p = proj.toPixel({ lat: scene.reviewMark[0], lon: scene.reviewMark[1] });
    ctx.strokeStyle = "#ffd166";
    ctx.beginPath();
    ctx.moveTo(p.x - 8, p.y);
    ctx.lineTo(p.x + 8, p.y);
    ctx.moveTo(p.x, p.y - 8);
    ctx.lineTo(p.x, p.y + 8);
    ctx.stroke();
  }
}

function frameLoop(): void {
  if (scene.dirty) {
    scene.dirty = false;
    paint();
  }
  requestAnimationFrame(frameLoop);
}

// --- side panel -------------------------------------------------------------------

const panel = document.getElementById("panel") as HTMLDivElement;

const banner = el("div", "banner", "ready");
const phaseBadge = el("span", "badge", "idle");

const planSection = el("section", "card");
const liveSection = el("section", "card");
const reviewSection = el("section", "card");

const violationsList = el("ul", "violations");
const launchBtn = el("button", "", "Launch");
const checkBtn = el("button", "", "Check plan");
const fieldsBox = el("div", "fields");
const kindSelect = el("select") as HTMLSelectElement;
const modeSelect = el("select") as HTMLSelectElement;

const liveReadout = el("pre", "readout", "no telemetry yet");
const abortBtn = el("button", "", "Abort");
const loiterBtn = el("button", "", "Loiter here");

const missionSelect = el("select") as HTMLSelectElement;
const openReviewBtn = el("button", "", "Open review");
const overlayBtn = el("button", "", "Overlay track");
const scrubber = el("input") as HTMLInputElement;
const reviewReadout = el("pre", "readout", "no mission loaded");
const frameBox = el("pre", "framecard", "");

function rebuildFields(): void {
  fieldsBox.textContent = "";
  for (const spec of fieldSpecs(form.kind)) {
    const row = el("label", "field");
    row.append(el("span", "", `${spec.label}${spec.unit ? ` (${spec.unit})` : ""}`));
    const input = el("input") as HTMLInputElement;
    input.type = "number";
    input.value = String(form.getField(spec.name));
    if (spec.step !== undefined) input.step = String(spec.step);
    input.addEventListener("change", () => {
      form.setField(spec.name, Number(input.value));
      syncLaunchGate();
    });
    row.append(input);
    fieldsBox.append(row);
  }
}

function syncLaunchGate(): void {
  launchBtn.disabled = !form.submitEnabled;
  violationsList.textContent = "";
  for (const v of form.violations) {
    violationsList.append(el("li", "", v));
  }
  if (form.validation === "ok") {
    checkBtn.textContent = "Check plan (ok)";
  } else if (form.validation === "failed") {
    checkBtn.textContent = "Check plan (failed)";
  } else {
    checkBtn.textContent = "Check plan";
  }
}

function liveText(view: LiveView): string {
  const rows = [
    `link      ${view.connection}`,
    `t         ${fmt(view.simTime)} s`,
    `mission   ${view.missionId ?? "-"}`,
    `phase     ${view.phase ?? "-"}`,
    `position  ${view.position ? view.position.map((x) => x.toFixed(6)).join(", ") : "-"}`,
    `depth     ${fmt(view.depth, 1, " m")}`,
    `heading   ${fmt(view.heading, 1, " deg")}`,
    `altitude  ${fmt(view.altitude, 1, " m")}`,
    `image     ${view.imageId ?? "-"}`,
    view.note,
  ];
  return rows.join("\n");
}

function reviewText(values: ReviewValues): string {
  return [
    `t         ${values.t.toFixed(1)} s`,
    `phase     ${values.phase}`,
    `position  ${values.position.map((x) => x.toFixed(6)).join(", ")} (${values.source})`,
    `depth     ${values.depth.toFixed(2)} m`,
    `heading   ${values.heading.toFixed(1)} deg`,
    `altitude  ${values.altitude === null ? "-" : values.altitude.toFixed(1) + " m"}`,
    `ref       ${values.refHeading.toFixed(1)} deg (${values.refSource})`,
  ].join("\n");
}

const domView: View = {
  showPlanPreview(shape: PlanShape, _doc: PlanDoc): void {
    scene.shape = shape;
    scene.dirty = true;
  },
  showViolations(violations: string[]): void {
    violationsList.textContent = "";
    for (const v of violations) violationsList.append(el("li", "", v));
  },
  showPhase(phase: string | null): void {
    if (phase !== null) phaseBadge.textContent = phase;
  },
  showLive(view: LiveView): void {
    scene.live = view;
    scene.dirty = true;
    liveReadout.textContent = liveText(view);
  },
  showReview(values: ReviewValues, _rawText: string): void {
    reviewReadout.textContent = reviewText(values);
    scene.reviewMark = values.position;
    scene.dirty = true;
  },
  showBanner(message: string): void {
    banner.textContent = message;
  },
};

async function refreshMissionList(): Promise<void> {
  const missions = await client.missions();
  missionSelect.textContent = "";
  for (const m of missions) {
    const opt = el("option", "", `${m.mission_id} (${m.plan.type}, ${m.phase})`);
    opt.value = m.mission_id;
    missionSelect.append(opt);
  }
}

function wirePlanSection(): void {
  planSection.append(el("h2", "", "Plan"));
  for (const kind of ["line", "site", "circle"] as MissionKind[]) {
    const opt = el("option", "", kind);
    opt.value = kind;
    kindSelect.append(opt);
  }
  kindSelect.value = form.kind;
  kindSelect.addEventListener("change", () => {
    form.setKind(kindSelect.value as MissionKind);
    rebuildFields();
    syncLaunchGate();
  });
  for (const mode of ["depth", "altitude"]) {
    const opt = el("option", "", mode);
    opt.value = mode;
    modeSelect.append(opt);
  }
  modeSelect.addEventListener("change", () => {
    form.setDepthMode(modeSelect.value as "depth" | "altitude");
    syncLaunchGate();
  });
  checkBtn.addEventListener("click", () => {
    void (async () => {
      await form.submitForValidation(client);
      if (form.planDoc) domView.showPlanPreview(planShape(form.planDoc), form.planDoc);
      syncLaunchGate();
    })();
  });
  launchBtn.addEventListener("click", () => {
    void (async () => {
      const missionId = await planAndLaunchFlow(client, form, session, domView);
      syncLaunchGate();
      if (missionId !== null) await refreshMissionList();
    })();
  });
  const selects = el("div", "field-row");
  selects.append(kindSelect, modeSelect);
  const buttons = el("div", "field-row");
  buttons.append(checkBtn, launchBtn);
  planSection.append(selects, fieldsBox, buttons, violationsList);
  rebuildFields();
  syncLaunchGate();
}

function wireLiveSection(): void {
  liveSection.append(el("h2", "", "Live"));
  abortBtn.addEventListener("click", () => {
    const id = session.activeMissionId;
    if (id === null) return;
    void client.abort(id).then((ack) => {
      domView.showBanner(ack.ok ? "abort sent" : `abort refused: ${ack.error?.message}`);
    });
  });
  loiterBtn.addEventListener("click", () => {
    const id = session.activeMissionId;
    if (id === null) return;
    void client.loiter(id).then((ack) => {
      domView.showBanner(ack.ok ? "loitering" : `loiter refused: ${ack.error?.message}`);
    });
  });
  const buttons = el("div", "field-row");
  buttons.append(abortBtn, loiterBtn);
  liveSection.append(liveReadout, buttons);
}

function wireReviewSection(): void {
  reviewSection.append(el("h2", "", "Review"));
  scrubber.type = "range";
  scrubber.disabled = true;

  let reviewMission: string | null = null;
  openReviewBtn.addEventListener("click", () => {
    void (async () => {
      await refreshMissionList();
      const id = missionSelect.value;
      if (!id) return;
      const review = await reviewFlow(client, id, domView);
      reviewMission = id;
      scrubber.min = String(review.scrubberMin);
      scrubber.max = String(review.scrubberMax);
      scrubber.step = "any";
      scrubber.value = String(review.scrubberMin);
      scrubber.disabled = false;
      frameBox.textContent = review.current ? frameCard(review.current.doc.record) : "";
      let pending = false;
      scrubber.oninput = () => {
        if (pending) return; // keep-latest: one fetch in flight at a time
        pending = true;
        void (async () => {
          try {
            const res = await review.scrubTo(Number(scrubber.value));
            const values = review.displayedValues();
            if (values) domView.showReview(values, res.text);
            frameBox.textContent = frameCard(res.doc.record);
          } finally {
            pending = false;
          }
        })();
      };
    })();
  });
  overlayBtn.addEventListener("click", () => {
    if (reviewMission === null) return;
    void (async () => {
      const text = await client.exportText(reviewMission, "track");
      scene.track = parseTrack(text);
      scene.dirty = true;
      domView.showBanner(`track overlay: ${scene.track.length} points`);
    })();
  });
  const buttons = el("div", "field-row");
  buttons.append(missionSelect, openReviewBtn, overlayBtn);
  reviewSection.append(buttons, scrubber, reviewReadout, frameBox);
}

function boot(): void {
  const header = el("div", "header");
  header.append(el("strong", "", "seashark tablet"), phaseBadge);
  panel.append(header, banner, planSection, liveSection, reviewSection);
  wirePlanSection();
  wireLiveSection();
  wireReviewSection();
  requestAnimationFrame(frameLoop);

  void refreshMissionList().catch(() => domView.showBanner("station unreachable"));
  // live stream runs for the whole session; reconnect with a page reload
  void liveFlow(client, session, domView).catch((err) => {
    domView.showBanner(`telemetry error: ${err}`);
  });
  void client.status().then((status) => {
    domView.showPhase(status.phase);
    domView.showBanner(
      `connected: scenario ${status.scenario ?? "custom"}, x${status.settings.time_scale} time`,
    );
  });
}

boot();
