import { describe, expect, it } from 'vitest';

import {
  latToWorldY,
  lonToWorldX,
  project,
  unproject,
  visibleTiles,
  worldXToLon,
  worldYToLat,
  type Viewport,
} from '../src/mercator.js';

const VP: Viewport = {
  centerLat: 51.5074,
  centerLon: -0.1278,
  zoom: 17,
  widthPx: 640,
  heightPx: 480,
};

describe('web mercator', () => {
  it('places the null island at the middle of tile space', () => {
    expect(lonToWorldX(0, 0)).toBeCloseTo(0.5, 12);
    expect(latToWorldY(0, 0)).toBeCloseTo(0.5, 12);
  });

  it('doubles world coordinates per zoom level', () => {
    expect(lonToWorldX(12.3, 5)).toBeCloseTo(2 * lonToWorldX(12.3, 4), 9);
    expect(latToWorldY(48.1, 5)).toBeCloseTo(2 * latToWorldY(48.1, 4), 9);
  });

  it('inverts between lat/lon and world coordinates', () => {
    for (const [lat, lon] of [[51.5, -0.12], [0, 0], [-33.9, 151.2]] as const) {
      expect(worldXToLon(lonToWorldX(lon, 12), 12)).toBeCloseTo(lon, 9);
      expect(worldYToLat(latToWorldY(lat, 12), 12)).toBeCloseTo(lat, 9);
    }
  });

  it('projects the viewport center onto the canvas center', () => {
    const p = project(VP.centerLat, VP.centerLon, VP);
    expect(p.x).toBeCloseTo(320, 9);
    expect(p.y).toBeCloseTo(240, 9);
  });

  it('project and unproject round trip screen points', () => {
    for (const [x, y] of [[0, 0], [320, 240], [639, 479]] as const) {
      const { lat, lon } = unproject(x, y, VP);
      const back = project(lat, lon, VP);
      expect(back.x).toBeCloseTo(x, 6);
      expect(back.y).toBeCloseTo(y, 6);
    }
  });

  it('tiles cover the whole canvas', () => {
    const tiles = visibleTiles(VP);
    expect(tiles.length).toBeGreaterThanOrEqual(6);
    expect(Math.min(...tiles.map((t) => t.px))).toBeLessThanOrEqual(0);
    expect(Math.min(...tiles.map((t) => t.py))).toBeLessThanOrEqual(0);
    expect(Math.max(...tiles.map((t) => t.px))).toBeGreaterThanOrEqual(640 - 256);
    expect(Math.max(...tiles.map((t) => t.py))).toBeGreaterThanOrEqual(480 - 256);
  });
});
