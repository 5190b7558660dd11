// Viewer state: which image and record are selected, the truncation
// order, the sample density, and overlay visibility. The invariant
// `order <= maxOrder` (the record's stored harmonic order) is enforced
// here, not in the UI handlers.

import { RecordHeader, isHarmonicRoute } from "./api.js";

export interface ViewState {
  imageId: string | null;
  recordId: number | null;
  route: string | null;
  /** Stored harmonic order of the selected record; null for raster/polygon routes. */
  maxOrder: number | null;
  /** Truncation order used for reconstruction; null when not harmonic. */
  order: number | null;
  samples: number;
  overlayVisible: boolean;
}

export const DEFAULT_SAMPLES = 256;

export function initialState(): ViewState {
  return {
    imageId: null,
    recordId: null,
    route: null,
    maxOrder: null,
    order: null,
    samples: DEFAULT_SAMPLES,
    overlayVisible: true,
  };
}

export function selectImage(state: ViewState, imageId: string): ViewState {
  if (imageId === state.imageId) return state;
  return { ...initialState(), overlayVisible: state.overlayVisible, imageId };
}

export function selectRecord(state: ViewState, record: RecordHeader): ViewState {
  const harmonic = isHarmonicRoute(record.route);
  return {
    ...state,
    imageId: record.image_id,
    recordId: record.id,
    route: record.route,
    maxOrder: harmonic ? record.n_params : null,
    order: harmonic ? record.n_params : null,
  };
}

export function setOrder(state: ViewState, order: number): ViewState {
  if (state.maxOrder === null) return state;
  const clamped = Math.min(Math.max(Math.round(order), 1), state.maxOrder);
  return { ...state, order: clamped };
}

export function setSamples(state: ViewState, samples: number): ViewState {
  return { ...state, samples: Math.max(3, Math.round(samples)) };
}

export function toggleOverlay(state: ViewState): ViewState {
  return { ...state, overlayVisible: !state.overlayVisible };
}
