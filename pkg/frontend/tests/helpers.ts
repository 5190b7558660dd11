// Shared test scaffolding: DOM skeleton, canned API, recording renderer.

import { ApiClient } from "../src/api.js";
import { OverlayRenderer, OverlayScene } from "../src/renderer.js";

export function installDom(): void {
  document.body.innerHTML = `
    <ul id="image-list"></ul>
    <ul id="record-list"></ul>
    <div id="error-banner"></div>
    <canvas id="overlay-canvas" width="960" height="640"></canvas>
    <input type="checkbox" id="overlay-toggle" checked>
    <input type="range" id="order-slider" min="1" max="16" value="16" disabled>
    <span id="order-label"></span>
    <canvas id="spectrum-canvas" width="260" height="130"></canvas>
    <div id="spectrum-hover"></div>
    <div id="descriptor-panel"></div>
  `;
}

export class RecordingRenderer implements OverlayRenderer {
  scenes: OverlayScene[] = [];
  imageCalls: [unknown, number, number][] = [];

  setImage(source: unknown, width: number, height: number): void {
    this.imageCalls.push([source, width, height]);
  }

  draw(scene: OverlayScene): void {
    this.scenes.push(JSON.parse(JSON.stringify(scene)) as OverlayScene);
  }

  get lastScene(): OverlayScene {
    if (!this.scenes.length) throw new Error("nothing drawn yet");
    return this.scenes[this.scenes.length - 1];
  }
}

export interface FetchLogEntry {
  url: string;
  method: string;
}

/** Circle polygon truncated to k orders: radius shrinks with k for easy checks. */
export function cannedPolygon(recordId: number, order: number | null,
                              samples = 256): { points: [number, number][] } & Record<string, unknown> {
  const n = 16;
  const k = order ?? n;
  const radius = 40 + 4 * k;
  const points: [number, number][] = [];
  for (let s = 0; s < samples; s++) {
    const t = (2 * Math.PI * s) / samples;
    points.push([112 + radius * Math.cos(t), 112 + radius * Math.sin(t)]);
  }
  return {
    record_id: recordId,
    route: "Native-Fourier",
    order: k,
    samples,
    width: 224,
    height: 224,
    points,
  };
}

export const SPECTRUM = {
  record_id: 1,
  orders: Array.from({ length: 16 }, (_, i) => i + 1),
  magnitudes: Array.from({ length: 16 }, (_, i) => (i === 0 ? 90.0 : 3.0 / (i + 1))),
  units: "px",
};

export const DESCRIPTORS = {
  record_id: 1,
  space: "image",
  area_px2: 6361.7,
  perimeter_px: 282.7,
  centroid_px: [112.0, 112.0],
  orientation_rad: 0.0,
  elongation: 1.0,
};

export function makeMockApi(): { api: ApiClient; log: FetchLogEntry[] } {
  const log: FetchLogEntry[] = [];
  const routes: [RegExp, (m: RegExpMatchArray, url: URL) => unknown][] = [
    [/^\/api\/images$/, () => [
      { id: "img_0000", path: "img_0000.png", width: 224, height: 224, n_defects: 2 },
      { id: "img_0001", path: "img_0001.png", width: 224, height: 224, n_defects: 1 },
    ]],
    [/^\/api\/images\/img_0000\/records$/, () => [
      { id: 1, image_id: "img_0000", class: 0, confidence: 0.91,
        route: "Native-Fourier", n_params: 16, created_at: "t" },
      { id: 2, image_id: "img_0000", class: 1, confidence: 0.72,
        route: "Poly-256", n_params: 256, created_at: "t" },
    ]],
    [/^\/api\/records\/(\d+)\/polygon$/, (m, url) => {
      const order = url.searchParams.get("order");
      return cannedPolygon(Number(m[1]), order === null ? null : Number(order));
    }],
    [/^\/api\/records\/1\/spectrum$/, () => SPECTRUM],
    [/^\/api\/records\/(\d+)\/descriptors$/, (m) => ({ ...DESCRIPTORS, record_id: Number(m[1]) })],
  ];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://viewer.test");
    log.push({ url: url.pathname + url.search, method: init?.method ?? "GET" });
    for (const [pattern, handler] of routes) {
      const m = url.pathname.match(pattern);
      if (m) {
        const body = handler(m, url);
        return { ok: true, status: 200, json: async () => body } as Response;
      }
    }
    return { ok: false, status: 404, json: async () => ({}) } as Response;
  }) as typeof fetch;
  return { api: new ApiClient("", fetchFn), log };
}
