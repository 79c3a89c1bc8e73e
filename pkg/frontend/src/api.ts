import type {
  BevFrame,
  CalibrationParams,
  GridSummary,
  SceneMeta,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

/** Thin typed client for the calibration service. */
export class ApiClient {
  constructor(readonly baseUrl: string, private readonly doFetch: typeof fetch = fetch) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  async listScenes(): Promise<SceneMeta[]> {
    return asJson(await this.doFetch(this.url('/scenes')));
  }

  async getBev(sceneId: string, frame: number): Promise<BevFrame> {
    return asJson(
      await this.doFetch(this.url(`/scenes/${encodeURIComponent(sceneId)}/bev?frame=${frame}`)),
    );
  }

  async putCalibration(sceneId: string, cal: CalibrationParams): Promise<CalibrationParams> {
    return asJson(
      await this.doFetch(this.url(`/scenes/${encodeURIComponent(sceneId)}/calibration`), {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(cal),
      }),
    );
  }

  async saveCalibration(sceneId: string): Promise<{ path: string }> {
    return asJson(
      await this.doFetch(this.url(`/scenes/${encodeURIComponent(sceneId)}/calibration/save`), {
        method: 'POST',
      }),
    );
  }

  async putVp(sceneId: string, x: number, y: number): Promise<GridSummary> {
    return asJson(
      await this.doFetch(this.url(`/scenes/${encodeURIComponent(sceneId)}/vp`), {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ x, y }),
      }),
    );
  }

  async getTokens(sceneId: string): Promise<string> {
    const resp = await this.doFetch(this.url(`/scenes/${encodeURIComponent(sceneId)}/tokens`));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }
}
