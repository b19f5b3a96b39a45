/** Map-pane geometry: a local flat projection plus plan/track outlines.
 *
 * Everything drawn comes straight out of service documents; the only
 * client-side arithmetic is the projection from coordinates to pixels.
 */

import type { PlanDoc } from "./types.js";

export const METERS_PER_DEG_LAT = 111_320;

export interface LatLon {
  lat: number;
  lon: number;
}

export interface Pixel {
  x: number;
  y: number;
}

/** Equirectangular projection about a reference point; adequate for the
 * few-hundred-meter scenes this vehicle works in. */
export class MapProjection {
  private readonly mPerDegLon: number;

  constructor(
    readonly ref: LatLon,
    readonly metersPerPixel: number,
    readonly width: number,
    readonly height: number,
  ) {
    this.mPerDegLon = METERS_PER_DEG_LAT * Math.cos((ref.lat * Math.PI) / 180);
  }

  toPixel(p: LatLon): Pixel {
    const east = (p.lon - this.ref.lon) * this.mPerDegLon;
    const north = (p.lat - this.ref.lat) * METERS_PER_DEG_LAT;
    return {
      x: this.width / 2 + east / this.metersPerPixel,
      y: this.height / 2 - north / this.metersPerPixel,
    };
  }

  metersToPixels(m: number): number {
    return m / this.metersPerPixel;
  }

  /** Projection that fits every point inside width x height with a margin. */
  static fit(
    points: LatLon[],
    width: number,
    height: number,
    marginMeters = 25,
  ): MapProjection {
    if (points.length === 0) {
      return new MapProjection({ lat: 0, lon: 0 }, 1, width, height);
    }
    let minLat = Infinity;
    let maxLat = -Infinity;
    let minLon = Infinity;
    let maxLon = -Infinity;
    for (const p of points) {
      minLat = Math.min(minLat, p.lat);
      maxLat = Math.max(maxLat, p.lat);
      minLon = Math.min(minLon, p.lon);
      maxLon = Math.max(maxLon, p.lon);
    }
    const ref = { lat: (minLat + maxLat) / 2, lon: (minLon + maxLon) / 2 };
    const mPerDegLon = METERS_PER_DEG_LAT * Math.cos((ref.lat * Math.PI) / 180);
    const extentEast = (maxLon - minLon) * mPerDegLon + 2 * marginMeters;
    const extentNorth = (maxLat - minLat) * METERS_PER_DEG_LAT + 2 * marginMeters;
    const mpp = Math.max(extentEast / width, extentNorth / height, 0.05);
    return new MapProjection(ref, mpp, width, height);
  }
}

export interface PlanSegment {
  from: LatLon;
  to: LatLon;
}

export interface PlanCircle {
  center: LatLon;
  radiusM: number;
}

export interface PlanShape {
  segments: PlanSegment[];
  circles: PlanCircle[];
  /** Named points worth a marker (line starts, circle center). */
  anchors: LatLon[];
  rendezvous: LatLon | null;
}

/** Outline of a plan using only coordinates present in its document. */
export function planShape(doc: PlanDoc): PlanShape {
  if (doc.type === "line") {
    const distinct =
      doc.start.lat !== doc.rendezvous.lat || doc.start.lon !== doc.rendezvous.lon;
    return {
      segments: distinct ? [{ from: doc.start, to: doc.rendezvous }] : [],
      circles: [],
      anchors: [doc.start],
      rendezvous: doc.rendezvous,
    };
  }
  if (doc.type === "site") {
    const segments = doc.lines.map((line) => ({
      from: line.start,
      to: line.rendezvous,
    }));
    const last = doc.lines[doc.lines.length - 1];
    return {
      segments,
      circles: [],
      anchors: doc.lines.map((line) => line.start),
      rendezvous: last ? last.rendezvous : null,
    };
  }
  return {
    segments: [],
    circles: [{ center: doc.center, radiusM: doc.radius_m }],
    anchors: [doc.center],
    rendezvous: doc.center,
  };
}

export function shapePoints(shape: PlanShape): LatLon[] {
  const pts: LatLon[] = [...shape.anchors];
  for (const seg of shape.segments) pts.push(seg.from, seg.to);
  if (shape.rendezvous) pts.push(shape.rendezvous);
  for (const c of shape.circles) {
    // pad the fit by the circle's extent in each direction
    const dLat = c.radiusM / METERS_PER_DEG_LAT;
    const dLon =
      c.radiusM / (METERS_PER_DEG_LAT * Math.cos((c.center.lat * Math.PI) / 180));
    pts.push(
      { lat: c.center.lat + dLat, lon: c.center.lon },
      { lat: c.center.lat - dLat, lon: c.center.lon },
      { lat: c.center.lat, lon: c.center.lon + dLon },
      { lat: c.center.lat, lon: c.center.lon - dLon },
    );
  }
  return pts;
}

export interface TrackPoint {
  t: number;
  lat: number;
  lon: number;
  src: "gnss" | "dr";
}

/** Parse the service's plain-text track export: `t lat lon src` per row. */
export function parseTrack(text: string): TrackPoint[] {
  const out: TrackPoint[] = [];
  for (const row of text.split("\n")) {
    const line = row.trim();
    if (!line) continue;
    const parts = line.split(/\s+/);
    if (parts.length !== 4) throw new Error(`bad track row: ${row}`);
    out.push({
      t: Number(parts[0]),
      lat: Number(parts[1]),
      lon: Number(parts[2]),
      src: parts[3] as "gnss" | "dr",
    });
  }
  return out;
}
