/** Document shapes exchanged with the control station over HTTP.
 *
 * These mirror the service's JSON exactly; the UI renders the values it
 * receives and never recomputes them client-side (the one exception is the
 * map projection, which only turns coordinates into pixels).
 */

export interface LatLonDoc {
  lat: number;
  lon: number;
}

export interface DepthRefDoc {
  mode: "depth" | "altitude";
  value_m: number;
}

export interface LinePlanDoc {
  type: "line";
  start: LatLonDoc;
  heading_deg: number;
  timeout_s: number;
  depth_ref: DepthRefDoc;
  rendezvous: LatLonDoc;
  lead_in_m: number;
  assumed_speed_mps: number;
}

export interface SitePlanDoc {
  type: "site";
  center: LatLonDoc;
  num_lines: number;
  line_length_m: number;
  spacing_m: number;
  orientation_deg: number;
  depth_ref: DepthRefDoc;
  lead_in_m: number;
  assumed_speed_mps: number;
  lines: LinePlanDoc[];
}

export interface CirclePlanDoc {
  type: "circle";
  center: LatLonDoc;
  radius_m: number;
  speed_mps: number;
  depth_ref: DepthRefDoc;
  duration_s: number;
  spiral_rate_mps: number;
  direction: "cw" | "ccw";
}

export type PlanDoc = LinePlanDoc | SitePlanDoc | CirclePlanDoc;

/** Plan document as submitted from the form; the service fills defaults
 * (rendezvous, lead-in, derived site lines) and echoes the full version. */
export type NewPlanDoc = Record<string, unknown> & { type: string };

// --- command acknowledgments ------------------------------------------------

export interface AckErrorDoc {
  code: string;
  message: string;
}

export interface AckDoc<R = unknown> {
  request_id: string;
  ok: boolean;
  seq: number;
  sim_time: number;
  result?: R;
  error?: AckErrorDoc;
}

export interface CreatePlanResult {
  plan_id: string;
  plan: PlanDoc;
  violations: string[];
}

export interface ValidateResult {
  plan_id: string;
  violations: string[];
}

export interface LaunchResult {
  mission_id: string;
  phase: string;
}

// --- telemetry and logs -------------------------------------------------------

export interface FrameDoc {
  compass: number;
  depth: number;
  altitude: number | null;
  gnss: [number, number] | null;
  image: string | null;
  object_seen: boolean;
}

export interface RefDoc {
  heading: number;
  mode: string;
  value: number;
  source: string;
  issued_at: number;
}

export interface EstimateDoc {
  t: number;
  pos: [number, number];
  source: string;
  heading_used: number;
  speed_used: number;
}

/** One NDJSON telemetry frame. Submerged frames are bare heartbeats: the
 * acoustic path carries no frame/ref/estimate payload unless the station
 * runs with the omniscient debug link. */
export interface TelemetryDoc {
  sim_time: number;
  seq: number;
  connection: "surface" | "submerged";
  mission_id: string | null;
  phase?: string;
  frame?: FrameDoc;
  ref?: RefDoc;
  estimate?: EstimateDoc;
}

export interface StateDoc {
  pos: [number, number];
  depth: number;
  heading: number;
  speed: number;
  vr: number;
}

export interface RecordDoc {
  t: number;
  phase: string;
  state: StateDoc | null;
  frame: FrameDoc;
  ref: RefDoc;
  est: EstimateDoc;
}

export interface QuickviewDoc {
  mission_id: string;
  record: RecordDoc;
}

export interface MissionSummaryDoc {
  mission_id: string;
  plan: PlanDoc;
  phase: string;
  active: boolean;
  start_time: number | null;
  end_time: number | null;
  records: number;
  finalized: boolean;
}

export interface StatusDoc {
  scenario: string | null;
  sim_time: number;
  phase: string;
  mission_id: string | null;
  running: boolean;
  plans: string[];
  settings: {
    time_scale: number;
    decimation: number;
    omniscient_link: boolean;
    dt: number;
  };
  subscribers: number;
}
