// Web Mercator math for the slippy-map layer. World coordinates are measured
// in tiles at a given zoom: tile (0, 0) is the north-west corner, and one
// tile is 256 screen pixels.

export const TILE_SIZE = 256;

export interface Viewport {
  centerLat: number;
  centerLon: number;
  zoom: number;
  widthPx: number;
  heightPx: number;
}

export function lonToWorldX(lon: number, zoom: number): number {
  return ((lon + 180) / 360) * Math.pow(2, zoom);
}

export function latToWorldY(lat: number, zoom: number): number {
  const rad = (lat * Math.PI) / 180;
  return (
    ((1 - Math.log(Math.tan(rad) + 1 / Math.cos(rad)) / Math.PI) / 2) *
    Math.pow(2, zoom)
  );
}

export function worldXToLon(x: number, zoom: number): number {
  return (x / Math.pow(2, zoom)) * 360 - 180;
}

export function worldYToLat(y: number, zoom: number): number {
  const n = Math.PI - (2 * Math.PI * y) / Math.pow(2, zoom);
  return (180 / Math.PI) * Math.atan(0.5 * (Math.exp(n) - Math.exp(-n)));
}

/** Pixel position of a lat/lon inside the viewport's canvas. */
export function project(lat: number, lon: number, vp: Viewport): { x: number; y: number } {
  const cx = lonToWorldX(vp.centerLon, vp.zoom);
  const cy = latToWorldY(vp.centerLat, vp.zoom);
  return {
    x: vp.widthPx / 2 + (lonToWorldX(lon, vp.zoom) - cx) * TILE_SIZE,
    y: vp.heightPx / 2 + (latToWorldY(lat, vp.zoom) - cy) * TILE_SIZE,
  };
}

/** Inverse of project, for mouse interactions on the map. */
export function unproject(x: number, y: number, vp: Viewport): { lat: number; lon: number } {
  const cx = lonToWorldX(vp.centerLon, vp.zoom);
  const cy = latToWorldY(vp.centerLat, vp.zoom);
  return {
    lon: worldXToLon(cx + (x - vp.widthPx / 2) / TILE_SIZE, vp.zoom),
    lat: worldYToLat(cy + (y - vp.heightPx / 2) / TILE_SIZE, vp.zoom),
  };
}

/** Integer tile coordinates covering the viewport, with per-tile pixel origin. */
export function visibleTiles(vp: Viewport): Array<{ tx: number; ty: number; px: number; py: number }> {
  const n = Math.pow(2, vp.zoom);
  const cx = lonToWorldX(vp.centerLon, vp.zoom);
  const cy = latToWorldY(vp.centerLat, vp.zoom);
  const left = cx - vp.widthPx / 2 / TILE_SIZE;
  const top = cy - vp.heightPx / 2 / TILE_SIZE;
  const tiles = [];
  for (let tx = Math.floor(left); tx * TILE_SIZE < (left + vp.widthPx / TILE_SIZE) * TILE_SIZE; tx++) {
    for (let ty = Math.floor(top); ty * TILE_SIZE < (top + vp.heightPx / TILE_SIZE) * TILE_SIZE; ty++) {
      if (ty < 0 || ty >= n) continue;
      tiles.push({
        tx: ((tx % n) + n) % n,
        ty,
        px: Math.round((tx - left) * TILE_SIZE),
        py: Math.round((ty - top) * TILE_SIZE),
      });
    }
  }
  return tiles;
}
