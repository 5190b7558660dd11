// Descriptor panel. Values are image-space quantities (px / px^2),
// never physical measurements; the label says so explicitly.

import { DescriptorResponse } from "./api.js";

export function descriptorRows(d: DescriptorResponse): [string, string][] {
  return [
    ["area", `${d.area_px2.toFixed(1)} px²`],
    ["perimeter", `${d.perimeter_px.toFixed(1)} px`],
    ["centroid", `(${d.centroid_px[0].toFixed(1)}, ${d.centroid_px[1].toFixed(1)}) px`],
    ["orientation", `${d.orientation_rad.toFixed(4)} rad`],
    ["elongation", d.elongation.toFixed(4)],
  ];
}

export class DescriptorPanel {
  constructor(private root: HTMLElement) {}

  render(d: DescriptorResponse | null): void {
    this.root.innerHTML = "";
    if (!d) return;
    const note = document.createElement("p");
    note.className = "scope-note";
    note.textContent = "image-space values (no physical scale)";
    this.root.appendChild(note);
    const dl = document.createElement("dl");
    for (const [term, value] of descriptorRows(d)) {
      const dt = document.createElement("dt");
      dt.textContent = term;
      const dd = document.createElement("dd");
      dd.textContent = value;
      dl.appendChild(dt);
      dl.appendChild(dd);
    }
    this.root.appendChild(dl);
  }
}
