/** Post-mission review: scrubber over the mission timeline, one quickview
 * fetch per scrub position.
 *
 * The scrubber range comes from the mission summary's first/last record
 * times, and the service floors a query time to the nearest record at or
 * before it, so the displayed values snap to real records.
 */

import type { QuickviewFetch, StationClient } from "./api.js";
import type { RecordDoc } from "./types.js";

export interface ReviewValues {
  t: number;
  phase: string;
  position: [number, number];
  source: string;
  heading: number;
  depth: number;
  altitude: number | null;
  gnss: [number, number] | null;
  imageId: string | null;
  objectSeen: boolean;
  refHeading: number;
  refSource: string;
}

export class ReviewController {
  /** [first record time, last record time], set by load(). */
  range: [number, number] | null = null;
  current: QuickviewFetch | null = null;

  constructor(
    private readonly client: StationClient,
    readonly missionId: string,
  ) {}

  async load(): Promise<[number, number]> {
    const summaries = await this.client.missions();
    const mine = summaries.find((m) => m.mission_id === this.missionId);
    if (!mine) throw new Error(`mission ${this.missionId} not on station`);
    if (mine.start_time === null || mine.end_time === null) {
      throw new Error(`mission ${this.missionId} has no records yet`);
    }
    this.range = [mine.start_time, mine.end_time];
    return this.range;
  }

  get scrubberMin(): number {
    return this.range ? this.range[0] : 0;
  }

  get scrubberMax(): number {
    return this.range ? this.range[1] : 0;
  }

  /** Fetch the record for time t; returns the raw service response too. */
  async scrubTo(t: number): Promise<QuickviewFetch> {
    const res = await this.client.quickview(this.missionId, t);
    this.current = res;
    return res;
  }

  /** Time of the record actually shown (snapped by the service). */
  get displayTime(): number | null {
    return this.current ? this.current.doc.record.t : null;
  }

  /** Values for the review pane, copied verbatim from the service record. */
  displayedValues(): ReviewValues | null {
    if (!this.current) return null;
    return recordValues(this.current.doc.record);
  }
}

export function recordValues(rec: RecordDoc): ReviewValues {
  return {
    t: rec.t,
    phase: rec.phase,
    position: rec.est.pos,
    source: rec.est.source,
    heading: rec.frame.compass,
    depth: rec.frame.depth,
    altitude: rec.frame.altitude,
    gnss: rec.frame.gnss,
    imageId: rec.frame.image,
    objectSeen: rec.frame.object_seen,
    refHeading: rec.ref.heading,
    refSource: rec.ref.source,
  };
}

/** Stand-in camera frame: imagery is not simulated, so the review pane
 * shows the capture id on a placeholder card. */
export function frameCard(rec: RecordDoc): string {
  const lines = [`frame @ t=${rec.t.toFixed(1)} s`];
  if (rec.frame.image !== null) {
    lines.push(`image ${rec.frame.image} (placeholder, imagery not simulated)`);
  } else {
    lines.push("no image captured at this record");
  }
  lines.push(rec.frame.object_seen ? "object in view" : "no object in view");
  return lines.join("\n");
}
