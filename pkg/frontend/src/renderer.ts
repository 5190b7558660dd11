// Renderer contract: the app drives any implementation of this
// interface; the browser entry point supplies the WebGL one.

export interface OverlayPolygon {
  recordId: number;
  points: [number, number][]; // pixel coordinates of the source image
  highlighted: boolean;
}

export interface ViewTransform {
  scale: number;
  tx: number;
  ty: number;
}

export interface OverlayScene {
  imageSize: [number, number] | null;
  polygons: OverlayPolygon[];
  overlayVisible: boolean;
  transform: ViewTransform;
}

export interface OverlayRenderer {
  setImage(source: TexImageSource | null, width: number, height: number): void;
  draw(scene: OverlayScene): void;
}

export function identityTransform(): ViewTransform {
  return { scale: 1, tx: 0, ty: 0 };
}

/** Fit an image into the canvas, preserving aspect ratio. */
export function fitTransform(canvasW: number, canvasH: number,
                             imageW: number, imageH: number): ViewTransform {
  const scale = Math.min(canvasW / imageW, canvasH / imageH);
  return {
    scale,
    tx: (canvasW - imageW * scale) / 2,
    ty: (canvasH - imageH * scale) / 2,
  };
}

export function zoomAt(t: ViewTransform, cx: number, cy: number,
                       factor: number): ViewTransform {
  const scale = Math.min(Math.max(t.scale * factor, 1e-3), 1e4);
  const k = scale / t.scale;
  return { scale, tx: cx - k * (cx - t.tx), ty: cy - k * (cy - t.ty) };
}

export function panBy(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { ...t, tx: t.tx + dx, ty: t.ty + dy };
}
