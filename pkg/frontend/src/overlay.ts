// Marker placement math. This module positions service-provided values on
// screen and nothing more: the UI never re-derives projections, it only maps
// lat/lon (or u/v) numbers from responses to pixels.

import { project, type Viewport } from './mercator.js';
import type { BevObjectRecord } from './types.js';

export interface Marker {
  trackId: number;
  cls: string;
  stationary: boolean;
  orientation: string;
  x: number;
  y: number;
  color: string;
  /** Stationary objects render as hollow squares, movers as filled dots. */
  shape: 'dot' | 'square';
}

const CLASS_COLORS: Record<string, string> = {
  person: '#e63946',
  car: '#1d71b8',
  bus: '#f4a261',
  truck: '#9d4edd',
  bicycle: '#2a9d8f',
  motorbike: '#e76f51',
};

export function classColor(cls: string): string {
  return CLASS_COLORS[cls] ?? '#555555';
}

function toMarker(o: BevObjectRecord, x: number, y: number): Marker {
  return {
    trackId: o.track_id,
    cls: o.class,
    stationary: o.stationary,
    orientation: o.orientation,
    x,
    y,
    color: classColor(o.class),
    shape: o.stationary ? 'square' : 'dot',
  };
}

/** Geo-anchored objects onto the map pane. Objects without lat/lon are the
 * local panel's job and are skipped here. */
export function geoMarkers(objects: BevObjectRecord[], vp: Viewport): Marker[] {
  const markers: Marker[] = [];
  for (const o of objects) {
    if (o.lat === undefined || o.lon === undefined) continue;
    const p = project(o.lat, o.lon, vp);
    markers.push(toMarker(o, p.x, p.y));
  }
  return markers;
}

export interface BevPanel {
  widthPx: number;
  heightPx: number;
  bevWidth: number;
  bevDepth: number;
  margin: number;
}

/** u/v position inside the local BEV panel: u left-to-right, v bottom-up
 * (depth grows away from the camera row at the panel's bottom edge). */
export function panelPosition(u: number, v: number, panel: BevPanel): { x: number; y: number } {
  const innerW = panel.widthPx - 2 * panel.margin;
  const innerH = panel.heightPx - 2 * panel.margin;
  return {
    x: panel.margin + (u / panel.bevWidth) * innerW,
    y: panel.heightPx - panel.margin - (v / panel.bevDepth) * innerH,
  };
}

/** Every object lands on the local panel, geo-anchored or not. */
export function panelMarkers(objects: BevObjectRecord[], panel: BevPanel): Marker[] {
  return objects.map((o) => {
    const p = panelPosition(o.u, o.v, panel);
    return toMarker(o, p.x, p.y);
  });
}

/** Per-track polyline of past positions for the trajectory toggle. */
export function appendHistory(
  history: Map<number, Array<{ u: number; v: number; lat?: number; lon?: number }>>,
  objects: BevObjectRecord[],
  limit = 250,
): void {
  for (const o of objects) {
    let path = history.get(o.track_id);
    if (!path) {
      path = [];
      history.set(o.track_id, path);
    }
    path.push({ u: o.u, v: o.v, lat: o.lat, lon: o.lon });
    if (path.length > limit) path.splice(0, path.length - limit);
  }
}
