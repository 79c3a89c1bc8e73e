// UI state: one plain object the controller mutates and the render loop
// reads. Slider ranges follow the service-validated domain: z in [0.1, 5],
// x in [-bev_width / 2, +bev_width / 2] (both configurable).

import type { CalibrationParams, SceneMeta } from './types.js';
import { DEFAULT_CALIBRATION } from './types.js';

export interface SliderRanges {
  zMin: number;
  zMax: number;
  xMin: number;
  xMax: number;
}

export interface UiState {
  scenes: SceneMeta[];
  selected: SceneMeta | null;
  frame: number;
  playing: boolean;
  /** Calibration the service last confirmed. */
  applied: CalibrationParams;
  /**.Slider positions (may run ahead of `applied` while debouncing). */
  sliders: { z: number; x: number };
  vpMarker: { x: number; y: number };
  ranges: SliderRanges;
  showTrajectories: boolean;
  lastError: string | null;
}

export function defaultRanges(bevWidth: number): SliderRanges {
  return { zMin: 0.1, zMax: 5.0, xMin: -bevWidth / 2, xMax: bevWidth / 2 };
}

export function initialState(): UiState {
  return {
    scenes: [],
    selected: null,
    frame: 0,
    playing: false,
    applied: { ...DEFAULT_CALIBRATION },
    sliders: { z: 1.0, x: 0.0 },
    vpMarker: { x: 0, y: 0 },
    ranges: defaultRanges(20),
    showTrajectories: true,
    lastError: null,
  };
}

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function clampSlider(state: UiState, kind: 'z' | 'x', value: number): number {
  const r = state.ranges;
  return kind === 'z' ? clamp(value, r.zMin, r.zMax) : clamp(value, r.xMin, r.xMax);
}

export function clampFrame(state: UiState, frame: number): number {
  if (!state.selected) return 0;
  return clamp(Math.round(frame), state.selected.frame_min, state.selected.frame_max);
}

/** Advance one frame; returns false (and stops playback) at the end. */
export function advanceFrame(state: UiState): boolean {
  if (!state.selected || state.frame >= state.selected.frame_max) {
    state.playing = false;
    return false;
  }
  state.frame += 1;
  return true;
}
