// Typed client for the read-only review API. Every call is a GET; the
// viewer never mutates the store.

export interface ImageInfo {
  id: string;
  path: string;
  width: number;
  height: number;
  n_defects: number;
}

export interface RecordHeader {
  id: number;
  image_id: string;
  class: number;
  confidence: number;
  route: string;
  n_params: number;
  created_at: string;
}

export interface PolygonResponse {
  record_id: number;
  route: string;
  order: number | null;
  samples: number;
  width: number;
  height: number;
  points: [number, number][];
}

export interface SpectrumResponse {
  record_id: number;
  orders: number[];
  magnitudes: number[];
  units: string;
}

export interface DescriptorResponse {
  record_id: number;
  space: string;
  area_px2: number;
  perimeter_px: number;
  centroid_px: [number, number];
  orientation_rad: number;
  elongation: number;
}

export const HARMONIC_ROUTES = ["Native-Fourier", "Fourier-fit"];

export function isHarmonicRoute(route: string): boolean {
  return HARMONIC_ROUTES.includes(route);
}

export function polygonPath(recordId: number, order?: number, samples?: number): string {
  const params = new URLSearchParams();
  if (order !== undefined) params.set("order", String(order));
  if (samples !== undefined) params.set("samples", String(samples));
  const qs = params.toString();
  return `/api/records/${recordId}/polygon` + (qs ? `?${qs}` : "");
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: typeof fetch = globalThis.fetch?.bind(globalThis),
  ) {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const resp = await this.fetchFn(this.base + path, { method: "GET", signal });
    if (!resp.ok) {
      throw new ApiError(resp.status, `${path} failed with ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  listImages(signal?: AbortSignal): Promise<ImageInfo[]> {
    return this.get("/api/images", signal);
  }

  imageRecords(imageId: string, signal?: AbortSignal): Promise<RecordHeader[]> {
    return this.get(`/api/images/${encodeURIComponent(imageId)}/records`, signal);
  }

  polygon(recordId: number, order?: number, samples?: number,
          signal?: AbortSignal): Promise<PolygonResponse> {
    return this.get(polygonPath(recordId, order, samples), signal);
  }

  spectrum(recordId: number, signal?: AbortSignal): Promise<SpectrumResponse> {
    return this.get(`/api/records/${recordId}/spectrum`, signal);
  }

  descriptors(recordId: number, signal?: AbortSignal): Promise<DescriptorResponse> {
    return this.get(`/api/records/${recordId}/descriptors`, signal);
  }

  imageUrl(imageId: string): string {
    return `${this.base}/images/${encodeURIComponent(imageId)}`;
  }
}

// Keeps one in-flight request per panel: starting a new one aborts the
// previous, so a stale response can never overwrite a newer selection.
export class LatestGate {
  private controller: AbortController | null = null;

  next(): AbortSignal {
    this.controller?.abort();
    this.controller = new AbortController();
    return this.controller.signal;
  }

  cancel(): void {
    this.controller?.abort();
    this.controller = null;
  }
}
