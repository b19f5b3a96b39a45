/** Operator workflows, decoupled from the DOM so tests can drive them.
 *
 * A flow talks to the station through StationClient and reports everything
 * it would display through the View interface; main.ts provides the real
 * DOM-backed view.
 */

import type { StationClient, StreamOptions } from "./api.js";
import { planShape, type PlanShape } from "./mapview.js";
import type { UiMissionForm } from "./planform.js";
import { ReviewController, type ReviewValues } from "./review.js";
import type { LiveView, UiSessionState } from "./session.js";
import type { PlanDoc } from "./types.js";

export interface View {
  showPlanPreview(shape: PlanShape, doc: PlanDoc): void;
  showViolations(violations: string[]): void;
  showPhase(phase: string | null): void;
  showLive(view: LiveView): void;
  showReview(values: ReviewValues, rawText: string): void;
  showBanner(message: string): void;
}

/** Validate the form on the station, preview it, and launch if clean.
 *
 * Returns the new mission id, or null when validation blocked the launch.
 */
export async function planAndLaunchFlow(
  client: StationClient,
  form: UiMissionForm,
  session: UiSessionState,
  view: View,
): Promise<string | null> {
  await form.submitForValidation(client);
  if (form.planDoc !== null) {
    view.showPlanPreview(planShape(form.planDoc), form.planDoc);
  }
  if (!form.submitEnabled) {
    view.showViolations(form.violations);
    view.showBanner("plan not launchable; fix the reported violations");
    return null;
  }
  view.showViolations([]);
  const { missionId, phase } = await form.launch(client);
  session.activeMissionId = missionId;
  view.showPhase(phase);
  view.showBanner(`mission ${missionId} launched`);
  return missionId;
}

/** Consume live telemetry into the session, rendering keep-latest views. */
export async function liveFlow(
  client: StationClient,
  session: UiSessionState,
  view: View,
  opts: StreamOptions = {},
): Promise<number> {
  const frames = await client.streamTelemetry((doc) => {
    session.ingest(doc);
    const live = session.liveView();
    view.showLive(live);
    view.showPhase(live.phase);
  }, opts);
  if (!opts.signal?.aborted) {
    session.markLost();
    view.showLive(session.liveView());
    view.showBanner("telemetry stream ended");
  }
  return frames;
}

/** Open a finished mission for review, positioned at its first record. */
export async function reviewFlow(
  client: StationClient,
  missionId: string,
  view: View,
): Promise<ReviewController> {
  const review = new ReviewController(client, missionId);
  const [start] = await review.load();
  const fetched = await review.scrubTo(start);
  const values = review.displayedValues();
  if (values) view.showReview(values, fetched.text);
  return review;
}
