import { describe, expect, it } from "vitest";

import { barAt, barLayout } from "../src/spectrum.js";

describe("spectrum bars", () => {
  const orders = [1, 2, 3, 4];
  const mags = [8, 4, 2, 1];

  it("bar heights are proportional to magnitudes", () => {
    const bars = barLayout(orders, mags, 200, 114, null);
    expect(bars.length).toBe(4);
    expect(bars[0].height).toBeGreaterThan(0);
    expect(bars[1].height / bars[0].height).toBeCloseTo(0.5, 9);
    expect(bars[3].height / bars[0].height).toBeCloseTo(0.125, 9);
    for (const [i, bar] of bars.entries()) {
      expect(bar.value).toBe(mags[i]);
      expect(bar.order).toBe(orders[i]);
    }
  });

  it("shades bars above the truncation cutoff", () => {
    const bars = barLayout(orders, mags, 200, 100, 2);
    expect(bars.map((b) => b.aboveCutoff)).toEqual([false, false, true, true]);
  });

  it("no cutoff shades nothing", () => {
    const bars = barLayout(orders, mags, 200, 100, null);
    expect(bars.every((b) => !b.aboveCutoff)).toBe(true);
  });

  it("zero magnitudes yield empty bars", () => {
    const bars = barLayout(orders, [0, 0, 0, 0], 200, 100, null);
    expect(bars.every((b) => b.height === 0)).toBe(true);
  });

  it("hit testing finds the bar under the cursor", () => {
    const bars = barLayout(orders, mags, 200, 100, null);
    const bar = barAt(bars, bars[2].x + bars[2].width / 2);
    expect(bar?.order).toBe(3);
    expect(barAt(bars, -5)).toBeNull();
  });
});
