// Glue between controls and the service: debounced calibration writes,
// vanishing-point drags with snap-back on rejection, frame scrubbing and
// playback. Overlay refreshes always use the service response, never
// optimistic math.

import { ApiClient, ApiError } from './api.js';
import { TrailingGate } from './debounce.js';
import {
  advanceFrame,
  clampFrame,
  clampSlider,
  defaultRanges,
  initialState,
  type UiState,
} from './state.js';
import type { BevFrame, CalibrationParams, GridSummary } from './types.js';

export interface ControllerEvents {
  onFrame?(frame: BevFrame): void;
  onCalibration?(cal: CalibrationParams): void;
  onGrid?(grid: GridSummary): void;
  onError?(message: string): void;
  onStateChange?(): void;
}

export class CalibrationController {
  readonly state: UiState = initialState();
  private gate: TrailingGate<CalibrationParams>;
  lastFrame: BevFrame | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly events: ControllerEvents = {},
    debounceMs = 150,
  ) {
    this.gate = new TrailingGate(debounceMs, (cal) => this.sendCalibration(cal));
  }

  async loadScenes(): Promise<void> {
    this.state.scenes = await this.api.listScenes();
    this.events.onStateChange?.();
  }

  async selectScene(sceneId: string): Promise<void> {
    const scene = this.state.scenes.find((s) => s.id === sceneId);
    if (!scene) throw new Error(`unknown scene ${sceneId}`);
    this.state.selected = scene;
    this.state.frame = scene.frame_min;
    this.state.vpMarker = { ...scene.vp };
    this.state.ranges = defaultRanges(scene.bev_width);
    await this.refresh();
  }

  /** GET the current frame and hand the response to the overlay. */
  async refresh(): Promise<BevFrame | null> {
    const scene = this.state.selected;
    if (!scene) return null;
    const frame = await this.api.getBev(scene.id, this.state.frame);
    this.lastFrame = frame;
    this.state.applied = frame.calibration;
    this.events.onFrame?.(frame);
    this.events.onStateChange?.();
    return frame;
  }

  /** Slider moved: range-clamp, show immediately, PUT behind the debounce.
   * Re-issuing the already-applied value sends nothing. */
  sliderChanged(kind: 'z' | 'x', value: number): void {
    const clamped = clampSlider(this.state, kind, value);
    this.state.sliders[kind] = clamped;
    const target: CalibrationParams = {
      ...this.state.applied,
      z_value: kind === 'z' ? clamped : this.state.sliders.z,
      x_value: kind === 'x' ? clamped : this.state.sliders.x,
    };
    if (
      target.z_value === this.state.applied.z_value &&
      target.x_value === this.state.applied.x_value
    ) {
      return;
    }
    this.gate.push(target);
    this.events.onStateChange?.();
  }

  private async sendCalibration(cal: CalibrationParams): Promise<void> {
    const scene = this.state.selected;
    if (!scene) return;
    try {
      const applied = await this.api.putCalibration(scene.id, cal);
      this.state.applied = applied;
      this.state.lastError = null;
      await this.refresh();
      this.events.onCalibration?.(applied);
    } catch (err) {
      // Revert the sliders to the last accepted values and surface the error.
      this.state.sliders = {
        z: this.state.applied.z_value,
        x: this.state.applied.x_value,
      };
      this.state.lastError = err instanceof Error ? err.message : String(err);
      this.events.onError?.(this.state.lastError);
      this.events.onStateChange?.();
    }
  }

  /** Wait until no calibration write is pending or in flight. */
  calibrationSettled(): Promise<void> {
    return this.gate.settled();
  }

  /** VP marker dropped: PUT, rebuild preview; a rejection snaps the marker
   * back to the last accepted position. */
  async vpDragged(x: number, y: number): Promise<void> {
    const scene = this.state.selected;
    if (!scene) return;
    const before = { ...this.state.vpMarker };
    this.state.vpMarker = { x, y };
    try {
      const grid = await this.api.putVp(scene.id, x, y);
      this.state.lastError = null;
      this.events.onGrid?.(grid);
      await this.refresh();
    } catch (err) {
      this.state.vpMarker = before;
      this.state.lastError =
        err instanceof ApiError ? `vanishing point rejected: ${err.message}` : String(err);
      this.events.onError?.(this.state.lastError);
      this.events.onStateChange?.();
    }
  }

  async scrubTo(frame: number): Promise<void> {
    this.state.frame = clampFrame(this.state, frame);
    await this.refresh();
  }

  /** One playback step; false when the end of the scene stopped playback. */
  async playStep(): Promise<boolean> {
    if (!advanceFrame(this.state)) return false;
    await this.refresh();
    return true;
  }

  async save(): Promise<string> {
    const scene = this.state.selected;
    if (!scene) throw new Error('no scene selected');
    await this.calibrationSettled();
    const { path } = await this.api.saveCalibration(scene.id);
    return path;
  }
}
