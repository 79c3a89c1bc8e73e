// Slippy-tile base layer behind a thin adapter so no proprietary provider is
// hard-wired. The default is the public OpenStreetMap raster endpoint; when
// tiles cannot load (offline sandboxes) the map pane simply stays blank and
// the local BEV panel carries the scene.

import { TILE_SIZE, visibleTiles, type Viewport } from './mercator.js';

export interface TileAdapter {
  /** URL for one tile; z/x/y in slippy convention. */
  tileUrl(z: number, x: number, y: number): string;
  readonly attribution: string;
}

export class OsmTileAdapter implements TileAdapter {
  readonly attribution = '© OpenStreetMap contributors';
  constructor(
    private readonly template: string = 'https://tile.openstreetmap.org/{z}/{x}/{y}.png',
  ) {}

  tileUrl(z: number, x: number, y: number): string {
    return this.template
      .replace('{z}', String(z))
      .replace('{x}', String(x))
      .replace('{y}', String(y));
  }
}

/** Draws base tiles on a canvas, caching decoded images per URL. */
export class TileLayer {
  private cache = new Map<string, HTMLImageElement>();

  constructor(private readonly adapter: TileAdapter, private readonly onLoaded: () => void) {}

  draw(ctx: CanvasRenderingContext2D, vp: Viewport): void {
    for (const { tx, ty, px, py } of visibleTiles(vp)) {
      const url = this.adapter.tileUrl(vp.zoom, tx, ty);
      const cached = this.cache.get(url);
      if (cached && cached.complete && cached.naturalWidth > 0) {
        ctx.drawImage(cached, px, py, TILE_SIZE, TILE_SIZE);
        continue;
      }
      if (!cached) {
        const img = new Image();
        img.crossOrigin = 'anonymous';
        img.onload = this.onLoaded;
        img.src = url;
        this.cache.set(url, img);
      }
      ctx.fillStyle = '#e8ecef';
      ctx.fillRect(px, py, TILE_SIZE, TILE_SIZE);
    }
  }
}
