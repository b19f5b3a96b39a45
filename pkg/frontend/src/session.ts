/** Client-side session state: latest telemetry, connection health, and the
 * honest live view.
 *
 * The vehicle has no positioning underwater, so a submerged interval must
 * never show a live position; the view exposes the last surfaced fix
 * separately, clearly marked stale, and nothing else.
 */

import type { RefDoc, TelemetryDoc } from "./types.js";

export type ConnectionState = "idle" | "surface" | "submerged" | "lost";

export interface LiveView {
  connection: ConnectionState;
  simTime: number | null;
  missionId: string | null;
  phase: string | null;
  /** Current vehicle position; null whenever the vehicle is not surfaced. */
  position: [number, number] | null;
  heading: number | null;
  depth: number | null;
  altitude: number | null;
  objectSeen: boolean;
  imageId: string | null;
  ref: RefDoc | null;
  /** Last position received while surfaced, for a stale map marker. */
  lastSurfacePosition: [number, number] | null;
  lastSurfaceTime: number | null;
  note: string;
}

const IDLE_VIEW: LiveView = {
  connection: "idle",
  simTime: null,
  missionId: null,
  phase: null,
  position: null,
  heading: null,
  depth: null,
  altitude: null,
  objectSeen: false,
  imageId: null,
  ref: null,
  lastSurfacePosition: null,
  lastSurfaceTime: null,
  note: "no telemetry yet",
};

export class UiSessionState {
  connection: ConnectionState = "idle";
  activeMissionId: string | null = null;
  /** Keep-latest buffer: rendering may lag the stream, so frames overwrite
   * rather than queue. */
  latest: TelemetryDoc | null = null;
  framesSeen = 0;
  /** Sequence-number gaps observed (decimation or dropped frames). */
  gaps = 0;

  private lastSeq: number | null = null;
  private lastSurface: TelemetryDoc | null = null;
  private submergedSince: number | null = null;

  ingest(doc: TelemetryDoc): void {
    this.framesSeen += 1;
    if (this.lastSeq !== null && doc.seq > this.lastSeq + 1) {
      this.gaps += doc.seq - this.lastSeq - 1;
    }
    this.lastSeq = doc.seq;
    this.latest = doc;
    this.connection = doc.connection;
    if (doc.mission_id !== null) this.activeMissionId = doc.mission_id;
    if (doc.connection === "surface") {
      this.lastSurface = doc;
      this.submergedSince = null;
    } else if (this.submergedSince === null) {
      this.submergedSince = doc.sim_time;
    }
  }

  /** Stream ended or errored without an explicit stop. */
  markLost(): void {
    this.connection = "lost";
  }

  reset(): void {
    this.connection = "idle";
    this.latest = null;
    this.lastSeq = null;
    this.lastSurface = null;
    this.submergedSince = null;
    this.framesSeen = 0;
    this.gaps = 0;
  }

  liveView(): LiveView {
    const doc = this.latest;
    if (doc === null) {
      return { ...IDLE_VIEW, connection: this.connection };
    }
    const surface = this.lastSurface;
    const lastPos = surface?.estimate?.pos ?? null;
    const lastTime = surface?.sim_time ?? null;

    if (doc.connection === "submerged" || this.connection === "lost") {
      // Honesty rule: no live position without a surfaced fix, even if a
      // debug link leaks extra fields into the heartbeat.
      const since = this.submergedSince ?? doc.sim_time;
      const note =
        this.connection === "lost"
          ? "telemetry lost"
          : `submerged since t=${since.toFixed(1)} s, position withheld until surfacing`;
      return {
        connection: this.connection === "lost" ? "lost" : "submerged",
        simTime: doc.sim_time,
        missionId: doc.mission_id,
        phase: null,
        position: null,
        heading: null,
        depth: null,
        altitude: null,
        objectSeen: false,
        imageId: null,
        ref: null,
        lastSurfacePosition: lastPos,
        lastSurfaceTime: lastTime,
        note,
      };
    }

    return {
      connection: "surface",
      simTime: doc.sim_time,
      missionId: doc.mission_id,
      phase: doc.phase ?? null,
      position: doc.estimate?.pos ?? null,
      heading: doc.frame?.compass ?? null,
      depth: doc.frame?.depth ?? null,
      altitude: doc.frame?.altitude ?? null,
      objectSeen: doc.frame?.object_seen ?? false,
      imageId: doc.frame?.image ?? null,
      ref: doc.ref ?? null,
      lastSurfacePosition: lastPos,
      lastSurfaceTime: lastTime,
      note: "surfaced, GNSS fix live",
    };
  }
}
