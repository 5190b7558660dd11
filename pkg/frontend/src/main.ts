// Application wiring: a human inspector's choices (which image, which
// record, which truncation order) drive every fetch. The app issues
// only GET requests and renders whatever the review API returns.

import {
  ApiClient,
  ImageInfo,
  LatestGate,
  PolygonResponse,
  RecordHeader,
  isHarmonicRoute,
} from "./api.js";
import { DescriptorPanel } from "./descriptors.js";
import {
  OverlayRenderer,
  ViewTransform,
  fitTransform,
  panBy,
  zoomAt,
} from "./renderer.js";
import { SpectrumPanel } from "./spectrum.js";
import {
  ViewState,
  initialState,
  selectImage,
  selectRecord,
  setOrder,
  toggleOverlay,
} from "./state.js";

export interface LoadedImage {
  source: TexImageSource;
  width: number;
  height: number;
}

export interface AppDeps {
  api: ApiClient;
  makeRenderer: (canvas: HTMLCanvasElement) => OverlayRenderer;
  loadImage?: (url: string) => Promise<LoadedImage | null>;
}

async function fetchBitmap(url: string): Promise<LoadedImage | null> {
  try {
    const resp = await fetch(url, { method: "GET" });
    if (!resp.ok) return null;
    const bitmap = await createImageBitmap(await resp.blob());
    return { source: bitmap, width: bitmap.width, height: bitmap.height };
  } catch {
    return null;
  }
}

export class ViewerApp {
  state: ViewState = initialState();
  records: RecordHeader[] = [];
  polygons = new Map<number, [number, number][]>();
  transform: ViewTransform = { scale: 1, tx: 0, ty: 0 };
  imageSize: [number, number] | null = null;

  private api: ApiClient;
  private renderer: OverlayRenderer;
  private loadImage: (url: string) => Promise<LoadedImage | null>;
  private canvas: HTMLCanvasElement;
  readonly spectrumPanel: SpectrumPanel;
  readonly descriptorPanel: DescriptorPanel;
  private polygonGate = new LatestGate();
  private panelGate = new LatestGate();
  private spectrumData: { orders: number[]; magnitudes: number[] } | null = null;

  constructor(private root: Document, deps: AppDeps) {
    this.api = deps.api;
    this.loadImage = deps.loadImage ?? fetchBitmap;
    this.canvas = this.el<HTMLCanvasElement>("overlay-canvas");
    this.renderer = deps.makeRenderer(this.canvas);
    this.spectrumPanel = new SpectrumPanel(
      this.el<HTMLCanvasElement>("spectrum-canvas"), this.el("spectrum-hover"));
    this.descriptorPanel = new DescriptorPanel(this.el("descriptor-panel"));
    this.bindControls();
  }

  private el<T extends HTMLElement = HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  }

  private bindControls(): void {
    const slider = this.el<HTMLInputElement>("order-slider");
    slider.addEventListener("input", () => {
      void this.changeOrder(Number(slider.value));
    });
    const toggle = this.el<HTMLInputElement>("overlay-toggle");
    toggle.addEventListener("change", () => {
      this.state = toggleOverlay(this.state);
      this.redraw();
    });
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const rect = this.canvas.getBoundingClientRect();
      const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.transform = zoomAt(this.transform, ev.clientX - rect.left,
                              ev.clientY - rect.top, factor);
      this.redraw();
    });
    let dragging = false;
    let last: [number, number] = [0, 0];
    this.canvas.addEventListener("mousedown", (ev) => {
      dragging = true;
      last = [ev.clientX, ev.clientY];
    });
    this.root.addEventListener("mouseup", () => {
      dragging = false;
    });
    this.root.addEventListener("mousemove", (ev) => {
      const e = ev as MouseEvent;
      if (!dragging) return;
      this.transform = panBy(this.transform, e.clientX - last[0], e.clientY - last[1]);
      last = [e.clientX, e.clientY];
      this.redraw();
    });
  }

  async start(): Promise<void> {
    try {
      const images = await this.api.listImages();
      this.renderImageList(images);
      this.setError(null);
    } catch (err) {
      this.setError(`could not load image list: ${err}`);
    }
  }

  private renderImageList(images: ImageInfo[]): void {
    const list = this.el("image-list");
    list.innerHTML = "";
    for (const info of images) {
      const item = this.root.createElement("li");
      item.dataset.imageId = info.id;
      item.textContent = `${info.id} (${info.n_defects})`;
      item.addEventListener("click", () => {
        void this.openImage(info);
      });
      list.appendChild(item);
    }
  }

  async openImage(info: ImageInfo): Promise<void> {
    this.state = selectImage(this.state, info.id);
    this.imageSize = [info.width, info.height];
    this.polygons.clear();
    this.spectrumPanel.clear();
    this.descriptorPanel.render(null);
    this.transform = fitTransform(this.canvas.width, this.canvas.height,
                                  info.width, info.height);
    try {
      const loaded = await this.loadImage(this.api.imageUrl(info.id));
      this.renderer.setImage(loaded ? loaded.source : null, info.width, info.height);
      this.records = await this.api.imageRecords(info.id);
      this.renderRecordList();
      // dim contours for every record up front; selection highlights one
      for (const rec of this.records) {
        const poly = await this.api.polygon(rec.id);
        this.polygons.set(rec.id, poly.points);
      }
      this.setError(null);
    } catch (err) {
      this.setError(`could not load ${info.id}: ${err}`);
    }
    this.redraw();
  }

  private renderRecordList(): void {
    const list = this.el("record-list");
    list.innerHTML = "";
    for (const rec of this.records) {
      const item = this.root.createElement("li");
      item.dataset.recordId = String(rec.id);
      item.textContent =
        `#${rec.id} ${rec.route} class ${rec.class} conf ${rec.confidence.toFixed(2)}`;
      item.addEventListener("click", () => {
        void this.openRecord(rec);
      });
      list.appendChild(item);
    }
  }

  async openRecord(rec: RecordHeader): Promise<void> {
    this.state = selectRecord(this.state, rec);
    const slider = this.el<HTMLInputElement>("order-slider");
    const label = this.el("order-label");
    if (this.state.maxOrder !== null) {
      slider.disabled = false;
      slider.min = "1";
      slider.max = String(this.state.maxOrder);
      slider.value = String(this.state.order);
      label.textContent = `order ${this.state.order}/${this.state.maxOrder}`;
    } else {
      slider.disabled = true;
      label.textContent = "stored polygon";
    }
    const signal = this.panelGate.next();
    try {
      await this.refetchSelectedPolygon();
      if (isHarmonicRoute(rec.route)) {
        const spec = await this.api.spectrum(rec.id, signal);
        this.spectrumData = { orders: spec.orders, magnitudes: spec.magnitudes };
        this.spectrumPanel.render(spec.orders, spec.magnitudes, this.state.order);
      } else {
        this.spectrumData = null;
        this.spectrumPanel.clear();
      }
      const desc = await this.api.descriptors(rec.id, signal);
      this.descriptorPanel.render(desc);
      this.setError(null);
    } catch (err) {
      if ((err as Error).name !== "AbortError") {
        this.setError(`could not load record ${rec.id}: ${err}`);
      }
    }
    this.redraw();
  }

  async changeOrder(order: number): Promise<void> {
    this.state = setOrder(this.state, order);
    const label = this.el("order-label");
    if (this.state.maxOrder !== null) {
      label.textContent = `order ${this.state.order}/${this.state.maxOrder}`;
    }
    try {
      await this.refetchSelectedPolygon();
      if (this.spectrumData) {
        this.spectrumPanel.render(this.spectrumData.orders,
                                  this.spectrumData.magnitudes, this.state.order);
      }
      this.setError(null);
    } catch (err) {
      if ((err as Error).name !== "AbortError") {
        this.setError(`reconstruction failed: ${err}`);
      }
    }
    this.redraw();
  }

  private async refetchSelectedPolygon(): Promise<void> {
    if (this.state.recordId === null) return;
    const signal = this.polygonGate.next();
    const poly: PolygonResponse = await this.api.polygon(
      this.state.recordId,
      this.state.maxOrder !== null ? this.state.order ?? undefined : undefined,
      undefined, signal);
    this.polygons.set(this.state.recordId, poly.points);
  }

  redraw(): void {
    this.renderer.draw({
      imageSize: this.imageSize,
      overlayVisible: this.state.overlayVisible,
      transform: this.transform,
      polygons: this.records
        .filter((rec) => this.polygons.has(rec.id))
        .map((rec) => ({
          recordId: rec.id,
          points: this.polygons.get(rec.id)!,
          highlighted: rec.id === this.state.recordId,
        })),
    });
  }

  private setError(message: string | null): void {
    const banner = this.el("error-banner");
    banner.textContent = message ?? "";
    banner.style.display = message ? "block" : "none";
  }
}

export function mount(doc: Document, deps: AppDeps): ViewerApp {
  const app = new ViewerApp(doc, deps);
  void app.start();
  return app;
}
