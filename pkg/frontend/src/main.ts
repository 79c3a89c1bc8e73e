// Browser entry point: wires the controls, the map pane, and the local BEV
// panel to the calibration controller.

import { ApiClient } from './api.js';
import { CalibrationController } from './controller.js';
import { unproject, type Viewport } from './mercator.js';
import { appendHistory, geoMarkers, panelMarkers, panelPosition, type BevPanel, type Marker } from './overlay.js';
import { OsmTileAdapter, TileLayer } from './tiles.js';
import type { BevFrame } from './types.js';

const SERVICE_URL =
  new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8000';

const api = new ApiClient(SERVICE_URL);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const mapCanvas = el<HTMLCanvasElement>('map');
const panelCanvas = el<HTMLCanvasElement>('bev-panel');
const sceneSelect = el<HTMLSelectElement>('scene');
const zSlider = el<HTMLInputElement>('z-slider');
const xSlider = el<HTMLInputElement>('x-slider');
const zLabel = el<HTMLSpanElement>('z-label');
const xLabel = el<HTMLSpanElement>('x-label');
const frameSlider = el<HTMLInputElement>('frame');
const frameLabel = el<HTMLSpanElement>('frame-label');
const playButton = el<HTMLButtonElement>('play');
const saveButton = el<HTMLButtonElement>('save');
const trajToggle = el<HTMLInputElement>('trajectories');
const vpX = el<HTMLInputElement>('vp-x');
const vpY = el<HTMLInputElement>('vp-y');
const vpApply = el<HTMLButtonElement>('vp-apply');
const status = el<HTMLDivElement>('status');

const viewport: Viewport = {
  centerLat: 51.5074,
  centerLon: -0.1278,
  zoom: 18,
  widthPx: mapCanvas.width,
  heightPx: mapCanvas.height,
};

const history = new Map<number, Array<{ u: number; v: number; lat?: number; lon?: number }>>();
const tiles = new TileLayer(new OsmTileAdapter(), () => render());
let lastObjects: BevFrame['objects'] = [];

const controller = new CalibrationController(api, {
  onFrame(frame) {
    lastObjects = frame.objects;
    appendHistory(history, frame.objects);
    const geo = frame.objects.find((o) => o.lat !== undefined);
    if (geo && geo.lat !== undefined && geo.lon !== undefined) {
      viewport.centerLat = geo.lat;
      viewport.centerLon = geo.lon;
    }
    render();
  },
  onError(message) {
    status.textContent = message;
    status.classList.add('error');
    syncControls();
  },
  onCalibration() {
    status.textContent = 'calibration applied';
    status.classList.remove('error');
  },
  onStateChange() {
    syncControls();
  },
});

function syncControls(): void {
  const s = controller.state;
  zSlider.min = String(s.ranges.zMin);
  zSlider.max = String(s.ranges.zMax);
  zSlider.step = '0.05';
  xSlider.min = String(s.ranges.xMin);
  xSlider.max = String(s.ranges.xMax);
  xSlider.step = '0.1';
  zSlider.value = String(s.sliders.z);
  xSlider.value = String(s.sliders.x);
  zLabel.textContent = s.sliders.z.toFixed(2);
  xLabel.textContent = s.sliders.x.toFixed(1);
  if (s.selected) {
    frameSlider.min = String(s.selected.frame_min);
    frameSlider.max = String(s.selected.frame_max);
    frameSlider.value = String(s.frame);
    frameLabel.textContent = `${s.frame} / ${s.selected.frame_max}`;
    vpX.value = s.vpMarker.x.toFixed(1);
    vpY.value = s.vpMarker.y.toFixed(1);
  }
  playButton.textContent = s.playing ? 'pause' : 'play';
}

function drawMarker(ctx: CanvasRenderingContext2D, m: Marker): void {
  ctx.fillStyle = m.color;
  ctx.strokeStyle = m.color;
  if (m.shape === 'square') {
    ctx.lineWidth = 2;
    ctx.strokeRect(m.x - 5, m.y - 5, 10, 10);
  } else {
    ctx.beginPath();
    ctx.arc(m.x, m.y, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function render(): void {
  const mctx = mapCanvas.getContext('2d');
  const pctx = panelCanvas.getContext('2d');
  if (!mctx || !pctx) return;

  mctx.clearRect(0, 0, mapCanvas.width, mapCanvas.height);
  tiles.draw(mctx, viewport);
  for (const marker of geoMarkers(lastObjects, viewport)) drawMarker(mctx, marker);

  const panel: BevPanel = {
    widthPx: panelCanvas.width,
    heightPx: panelCanvas.height,
    bevWidth: controller.state.selected?.bev_width ?? 20,
    bevDepth: controller.state.selected?.bev_depth ?? 40,
    margin: 16,
  };
  pctx.clearRect(0, 0, panelCanvas.width, panelCanvas.height);
  pctx.strokeStyle = '#c0c7cd';
  pctx.strokeRect(panel.margin, panel.margin, panel.widthPx - 2 * panel.margin, panel.heightPx - 2 * panel.margin);
  if (controller.state.showTrajectories) {
    pctx.lineWidth = 1;
    for (const path of history.values()) {
      pctx.beginPath();
      path.forEach((pt, i) => {
        const p = panelPosition(pt.u, pt.v, panel);
        if (i === 0) pctx.moveTo(p.x, p.y);
        else pctx.lineTo(p.x, p.y);
      });
      pctx.strokeStyle = '#9aa5ad';
      pctx.stroke();
    }
  }
  for (const marker of panelMarkers(lastObjects, panel)) drawMarker(pctx, marker);
}

zSlider.addEventListener('input', () => controller.sliderChanged('z', Number(zSlider.value)));
xSlider.addEventListener('input', () => controller.sliderChanged('x', Number(xSlider.value)));
frameSlider.addEventListener('input', () => void controller.scrubTo(Number(frameSlider.value)));
trajToggle.addEventListener('change', () => {
  controller.state.showTrajectories = trajToggle.checked;
  render();
});
vpApply.addEventListener('click', () => void controller.vpDragged(Number(vpX.value), Number(vpY.value)));
mapCanvas.addEventListener('dblclick', (ev) => {
  const { lat, lon } = unproject(ev.offsetX, ev.offsetY, viewport);
  viewport.centerLat = lat;
  viewport.centerLon = lon;
  render();
});
saveButton.addEventListener('click', () => {
  void controller.save().then(
    (path) => {
      status.textContent = `calibration saved to ${path}`;
      status.classList.remove('error');
    },
    (err) => {
      status.textContent = String(err);
      status.classList.add('error');
    },
  );
});

let playTimer: ReturnType<typeof setInterval> | null = null;
playButton.addEventListener('click', () => {
  const s = controller.state;
  if (s.playing) {
    s.playing = false;
    if (playTimer) clearInterval(playTimer);
    playTimer = null;
  } else {
    s.playing = true;
    const fps = s.selected?.fps ?? 10;
    playTimer = setInterval(() => {
      void controller.playStep().then((more) => {
        if (!more && playTimer) {
          clearInterval(playTimer);
          playTimer = null;
          syncControls();
        }
      });
    }, 1000 / fps);
  }
  syncControls();
});

sceneSelect.addEventListener('change', () => {
  history.clear();
  void controller.selectScene(sceneSelect.value);
});

async function boot(): Promise<void> {
  try {
    await controller.loadScenes();
  } catch (err) {
    status.textContent = `cannot reach service at ${SERVICE_URL}: ${String(err)}`;
    status.classList.add('error');
    return;
  }
  sceneSelect.innerHTML = '';
  for (const scene of controller.state.scenes) {
    const opt = document.createElement('option');
    opt.value = scene.id;
    opt.textContent = `${scene.id} (${scene.frame_count} frames)`;
    sceneSelect.appendChild(opt);
  }
  const first = controller.state.scenes[0];
  if (first) await controller.selectScene(first.id);
}

void boot();
