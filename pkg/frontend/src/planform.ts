/** Mission form: field definitions per plan type, document assembly, and
 * the launch gate.
 *
 * Validation is the service's job. The form only tracks whether the current
 * field values have passed service-side validation; any edit drops the form
 * back to "unchecked" and disables launch until the next round-trip.
 */

import type { StationClient } from "./api.js";
import { StationHttpError } from "./api.js";
import type { NewPlanDoc, PlanDoc } from "./types.js";

export type MissionKind = "line" | "site" | "circle";
export type ValidationState = "unchecked" | "checking" | "ok" | "failed";

export interface FieldSpec {
  name: string;
  label: string;
  unit: string;
  value: number;
  step?: number;
}

const COMMON_FIELDS: FieldSpec[] = [
  { name: "lat", label: "Latitude", unit: "deg", value: 55.0, step: 0.0001 },
  { name: "lon", label: "Longitude", unit: "deg", value: 12.0, step: 0.0001 },
  { name: "depth_m", label: "Depth / altitude", unit: "m", value: 5.0, step: 0.5 },
];

const FIELDS: Record<MissionKind, FieldSpec[]> = {
  line: [
    ...COMMON_FIELDS,
    { name: "heading_deg", label: "Heading", unit: "deg", value: 90.0, step: 1 },
    { name: "timeout_s", label: "Run time", unit: "s", value: 120.0, step: 10 },
    { name: "lead_in_m", label: "Lead-in", unit: "m", value: 10.0, step: 5 },
  ],
  site: [
    ...COMMON_FIELDS,
    { name: "num_lines", label: "Lines", unit: "", value: 3, step: 1 },
    { name: "line_length_m", label: "Line length", unit: "m", value: 60.0, step: 10 },
    { name: "spacing_m", label: "Spacing", unit: "m", value: 12.0, step: 1 },
    { name: "orientation_deg", label: "Orientation", unit: "deg", value: 0.0, step: 1 },
  ],
  circle: [
    ...COMMON_FIELDS,
    { name: "radius_m", label: "Radius", unit: "m", value: 20.0, step: 5 },
    { name: "speed_mps", label: "Speed", unit: "m/s", value: 1.0, step: 0.1 },
    { name: "duration_s", label: "Duration", unit: "s", value: 120.0, step: 10 },
  ],
};

export function fieldSpecs(kind: MissionKind): FieldSpec[] {
  return FIELDS[kind].map((f) => ({ ...f }));
}

export class UiMissionForm {
  kind: MissionKind;
  depthMode: "depth" | "altitude" = "depth";
  validation: ValidationState = "unchecked";
  violations: string[] = [];
  /** Set once the current values have a service-side plan id. */
  planId: string | null = null;
  /** Normalized document echoed by the service (defaults filled in). */
  planDoc: PlanDoc | null = null;

  private values: Map<string, number>;

  constructor(kind: MissionKind = "site") {
    this.kind = kind;
    this.values = new Map(FIELDS[kind].map((f) => [f.name, f.value]));
  }

  setKind(kind: MissionKind): void {
    if (kind === this.kind) return;
    this.kind = kind;
    const next = new Map(FIELDS[kind].map((f) => [f.name, f.value]));
    // carry shared fields across so the operator keeps the chosen site
    for (const name of next.keys()) {
      const prev = this.values.get(name);
      if (prev !== undefined) next.set(name, prev);
    }
    this.values = next;
    this.invalidate();
  }

  setField(name: string, value: number): void {
    if (!this.values.has(name)) throw new Error(`unknown field ${name}`);
    this.values.set(name, value);
    this.invalidate();
  }

  setDepthMode(mode: "depth" | "altitude"): void {
    this.depthMode = mode;
    this.invalidate();
  }

  getField(name: string): number {
    const v = this.values.get(name);
    if (v === undefined) throw new Error(`unknown field ${name}`);
    return v;
  }

  fieldNames(): string[] {
    return [...this.values.keys()];
  }

  private invalidate(): void {
    this.validation = "unchecked";
    this.violations = [];
    this.planId = null;
    this.planDoc = null;
  }

  /** Assemble the plan document the station expects for this.kind. */
  toDocument(): NewPlanDoc {
    const v = (name: string) => this.getField(name);
    const depthRef = { mode: this.depthMode, value_m: v("depth_m") };
    const point = { lat: v("lat"), lon: v("lon") };
    if (this.kind === "line") {
      return {
        type: "line",
        start: point,
        heading_deg: v("heading_deg"),
        timeout_s: v("timeout_s"),
        depth_ref: depthRef,
        lead_in_m: v("lead_in_m"),
      };
    }
    if (this.kind === "site") {
      return {
        type: "site",
        center: point,
        num_lines: Math.round(v("num_lines")),
        line_length_m: v("line_length_m"),
        spacing_m: v("spacing_m"),
        orientation_deg: v("orientation_deg"),
        depth_ref: depthRef,
      };
    }
    return {
      type: "circle",
      center: point,
      radius_m: v("radius_m"),
      speed_mps: v("speed_mps"),
      duration_s: v("duration_s"),
      depth_ref: depthRef,
    };
  }

  /** Launch stays disabled until the service has validated these values. */
  get submitEnabled(): boolean {
    return this.validation === "ok" && this.planId !== null;
  }

  /** Create the plan on the station and run its validation. */
  async submitForValidation(client: StationClient): Promise<void> {
    this.invalidate();
    this.validation = "checking";
    let planId: string;
    try {
      const created = await client.createPlan(this.toDocument());
      if (!created.ok || !created.result) {
        this.validation = "failed";
        this.violations = [created.error?.message ?? "plan rejected"];
        return;
      }
      planId = created.result.plan_id;
      this.planDoc = created.result.plan;
      const checked = await client.validatePlan(planId);
      if (!checked.ok) {
        this.validation = "failed";
        this.violations = [checked.error?.message ?? "validation failed"];
        return;
      }
      this.violations = checked.result?.violations ?? [];
    } catch (err) {
      this.validation = "failed";
      this.violations = [err instanceof StationHttpError ? err.message : String(err)];
      return;
    }
    if (this.violations.length > 0) {
      this.validation = "failed";
      return;
    }
    this.planId = planId;
    this.validation = "ok";
  }

  /** Launch the validated plan; only callable once submitEnabled. */
  async launch(client: StationClient): Promise<{ missionId: string; phase: string }> {
    if (!this.submitEnabled || this.planId === null) {
      throw new Error("launch blocked: plan not validated");
    }
    const ack = await client.launch(this.planId);
    if (!ack.ok || !ack.result) {
      throw new StationHttpError(
        0,
        ack.error?.code ?? "LaunchFailed",
        ack.error?.message ?? "launch rejected",
        ack,
      );
    }
    return { missionId: ack.result.mission_id, phase: ack.result.phase };
  }
}
