// Wire types mirroring the calibration service's JSON responses.
// These are the only shapes the UI knows; every displayed number comes
// from one of these records.

export interface SceneMeta {
  id: string;
  frame_count: number;
  frame_min: number;
  frame_max: number;
  classes: string[];
  vp: { x: number; y: number };
  image_width: number;
  image_height: number;
  fps: number | null;
  bev_width: number;
  bev_depth: number;
}

export interface CalibrationParams {
  z_value: number;
  x_value: number;
  meters_per_unit: number;
  camera_lat: number | null;
  camera_lon: number | null;
  heading: number;
}

export interface BevObjectRecord {
  track_id: number;
  frame: number;
  t: number | null;
  class: string;
  u: number;
  v: number;
  lat?: number;
  lon?: number;
  stationary: boolean;
  orientation: string;
  box3d: [number, number][] | null;
}

export interface BevFrame {
  scene: string;
  frame: number;
  calibration: CalibrationParams;
  objects: BevObjectRecord[];
}

export interface GridSummary {
  vp: { x: number; y: number };
  src: [number, number][];
  bev_width: number;
  bev_depth: number;
  subdivisions: number;
}

export const DEFAULT_CALIBRATION: CalibrationParams = {
  z_value: 1.0,
  x_value: 0.0,
  meters_per_unit: 1.0,
  camera_lat: null,
  camera_lon: null,
  heading: 0.0,
};
