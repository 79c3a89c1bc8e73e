import { describe, expect, it } from 'vitest';

import { project, type Viewport } from '../src/mercator.js';
import {
  appendHistory,
  classColor,
  geoMarkers,
  panelMarkers,
  panelPosition,
  type BevPanel,
} from '../src/overlay.js';
import type { BevObjectRecord } from '../src/types.js';

const VP: Viewport = {
  centerLat: 51.5,
  centerLon: -0.12,
  zoom: 18,
  widthPx: 640,
  heightPx: 480,
};

const PANEL: BevPanel = { widthPx: 420, heightPx: 480, bevWidth: 20, bevDepth: 40, margin: 16 };

function obj(partial: Partial<BevObjectRecord>): BevObjectRecord {
  return {
    track_id: 1,
    frame: 0,
    t: 0,
    class: 'person',
    u: 10,
    v: 5,
    stationary: false,
    orientation: 'moving_straight',
    box3d: null,
    ...partial,
  };
}

describe('overlay placement', () => {
  it('renders one geo marker per georeferenced object at its projected spot', () => {
    const objects = [
      obj({ track_id: 1, lat: 51.5001, lon: -0.1201 }),
      obj({ track_id: 2, lat: 51.5002, lon: -0.1199, class: 'car' }),
      obj({ track_id: 3 }), // no geo: belongs to the local panel instead
    ];
    const markers = geoMarkers(objects, VP);
    expect(markers.length).toBe(2);
    const first = markers[0]!;
    const expected = project(51.5001, -0.1201, VP);
    expect(first.x).toBeCloseTo(expected.x, 9);
    expect(first.y).toBeCloseTo(expected.y, 9);
  });

  it('styles classes distinctly and marks stationary objects with a different shape', () => {
    const markers = geoMarkers(
      [
        obj({ track_id: 1, lat: 51.5, lon: -0.12, class: 'person', stationary: false }),
        obj({ track_id: 2, lat: 51.5, lon: -0.12, class: 'car', stationary: true }),
      ],
      VP,
    );
    expect(markers[0]!.color).not.toBe(markers[1]!.color);
    expect(markers[0]!.shape).toBe('dot');
    expect(markers[1]!.shape).toBe('square');
    expect(classColor('bus')).not.toBe(classColor('truck'));
  });

  it('places every object on the local panel, geo or not', () => {
    const objects = [obj({ track_id: 1 }), obj({ track_id: 2, lat: 51.5, lon: -0.12 })];
    expect(panelMarkers(objects, PANEL).length).toBe(2);
  });

  it('panel position is linear in u and v with depth growing upward', () => {
    const origin = panelPosition(0, 0, PANEL);
    expect(origin.x).toBeCloseTo(PANEL.margin, 9);
    expect(origin.y).toBeCloseTo(PANEL.heightPx - PANEL.margin, 9);

    const a = panelPosition(5, 10, PANEL);
    const b = panelPosition(10, 20, PANEL);
    expect(b.x - origin.x).toBeCloseTo(2 * (a.x - origin.x), 9);
    expect(origin.y - b.y).toBeCloseTo(2 * (origin.y - a.y), 9);
  });

  it('keeps a bounded per-track history for trajectory polylines', () => {
    const history = new Map<number, Array<{ u: number; v: number }>>();
    for (let f = 0; f < 300; f++) {
      appendHistory(history, [obj({ track_id: 9, u: f, v: f })], 250);
    }
    expect(history.get(9)!.length).toBe(250);
    expect(history.get(9)![249]!.u).toBe(299);
  });
});
