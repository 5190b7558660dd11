// Coefficient-spectrum panel: one bar per harmonic order, with the
// orders above the truncation cutoff shaded.

export interface Bar {
  order: number;
  x: number;
  y: number;
  width: number;
  height: number;
  value: number;
  aboveCutoff: boolean;
}

export function barLayout(orders: number[], magnitudes: number[],
                          panelWidth: number, panelHeight: number,
                          cutoff: number | null): Bar[] {
  const n = orders.length;
  if (n === 0) return [];
  const peak = Math.max(...magnitudes, 1e-12);
  const slot = panelWidth / n;
  const barWidth = Math.max(slot * 0.7, 1);
  return orders.map((order, i) => {
    const h = (magnitudes[i] / peak) * (panelHeight - 14);
    return {
      order,
      x: i * slot + (slot - barWidth) / 2,
      y: panelHeight - h,
      width: barWidth,
      height: h,
      value: magnitudes[i],
      aboveCutoff: cutoff !== null && order > cutoff,
    };
  });
}

export function barAt(bars: Bar[], x: number): Bar | null {
  for (const bar of bars) {
    if (x >= bar.x && x <= bar.x + bar.width) return bar;
  }
  return null;
}

export class SpectrumPanel {
  private bars: Bar[] = [];
  private hover: HTMLElement;

  constructor(private canvas: HTMLCanvasElement, hover: HTMLElement) {
    this.hover = hover;
    canvas.addEventListener("mousemove", (ev) => {
      const rect = canvas.getBoundingClientRect();
      const bar = barAt(this.bars, ev.clientX - rect.left);
      this.hover.textContent = bar
        ? `order ${bar.order}: ${bar.value.toFixed(3)} px`
        : "";
    });
    canvas.addEventListener("mouseleave", () => {
      this.hover.textContent = "";
    });
  }

  /** Bars of the latest render (drawn values, for hover and inspection). */
  get currentBars(): Bar[] {
    return this.bars;
  }

  render(orders: number[], magnitudes: number[], cutoff: number | null): void {
    const { width, height } = this.canvas;
    this.bars = barLayout(orders, magnitudes, width, height, cutoff);
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, width, height);
    for (const bar of this.bars) {
      ctx.fillStyle = bar.aboveCutoff ? "#3a4150" : "#e9b320";
      ctx.fillRect(bar.x, bar.y, bar.width, bar.height);
    }
    ctx.fillStyle = "#8b93a3";
    ctx.font = "10px sans-serif";
    if (this.bars.length) {
      ctx.fillText("1", this.bars[0].x, height - 2);
      const last = this.bars[this.bars.length - 1];
      ctx.fillText(String(last.order), last.x, height - 2);
    }
  }

  clear(): void {
    this.bars = [];
    const ctx = this.canvas.getContext("2d");
    ctx?.clearRect(0, 0, this.canvas.width, this.canvas.height);
  }
}
