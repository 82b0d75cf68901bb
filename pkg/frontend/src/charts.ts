import type { TickSeries } from "./ringbuffer.js";

interface Trace {
  series: TickSeries;
  color: string;
  label: string;
}

/** Minimal canvas line chart over tick-keyed ring buffers. */
export class LineChart {
  private traces: Trace[] = [];

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly title: string,
    private readonly fixedRange: [number, number] | null = null,
  ) {}

  addTrace(series: TickSeries, color: string, label: string): this {
    this.traces.push({ series, color, label });
    return this;
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width: w, height: h } = this.canvas;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#171c23";
    ctx.fillRect(0, 0, w, h);

    let tickLo = Infinity;
    let tickHi = -Infinity;
    let valLo = Infinity;
    let valHi = -Infinity;
    for (const t of this.traces) {
      const pts = t.series.points();
      if (!pts.length) continue;
      tickLo = Math.min(tickLo, pts[0][0]);
      tickHi = Math.max(tickHi, pts[pts.length - 1][0]);
      const [lo, hi] = t.series.valueRange();
      valLo = Math.min(valLo, lo);
      valHi = Math.max(valHi, hi);
    }
    if (this.fixedRange) [valLo, valHi] = this.fixedRange;
    if (!Number.isFinite(tickLo) || tickHi <= tickLo) {
      ctx.fillStyle = "#8a93a0";
      ctx.font = "12px sans-serif";
      ctx.fillText(`${this.title} (waiting for data)`, 8, 16);
      return;
    }
    if (valHi <= valLo) valHi = valLo + 1;

    const padL = 6;
    const padT = 20;
    const plotW = w - padL - 6;
    const plotH = h - padT - 8;
    const px = (tick: number) => padL + ((tick - tickLo) / (tickHi - tickLo)) * plotW;
    const py = (v: number) => padT + (1 - (v - valLo) / (valHi - valLo)) * plotH;

    ctx.strokeStyle = "#2c3440";
    ctx.lineWidth = 1;
    for (const frac of [0, 0.5, 1]) {
      const y = padT + frac * plotH;
      ctx.beginPath();
      ctx.moveTo(padL, y);
      ctx.lineTo(padL + plotW, y);
      ctx.stroke();
    }

    for (const t of this.traces) {
      const pts = t.series.points();
      if (pts.length < 2) continue;
      ctx.strokeStyle = t.color;
      ctx.lineWidth = 1.6;
      ctx.beginPath();
      pts.forEach(([tick, v], i) => {
        if (i === 0) ctx.moveTo(px(tick), py(v));
        else ctx.lineTo(px(tick), py(v));
      });
      ctx.stroke();
    }

    ctx.font = "12px sans-serif";
    ctx.textAlign = "left";
    let x = 8;
    ctx.fillStyle = "#c7cdd6";
    ctx.fillText(this.title, x, 14);
    x += ctx.measureText(this.title).width + 14;
    for (const t of this.traces) {
      ctx.fillStyle = t.color;
      const pts = t.series.points();
      const last = pts.length ? pts[pts.length - 1][1] : NaN;
      const text = `${t.label} ${Number.isFinite(last) ? formatValue(last) : "-"}`;
      ctx.fillText(text, x, 14);
      x += ctx.measureText(text).width + 14;
    }
  }
}

export function formatValue(v: number): string {
  if (Math.abs(v) >= 1_000_000) return (v / 1_000_000).toFixed(1) + "M";
  if (Math.abs(v) >= 10_000) return (v / 1000).toFixed(0) + "k";
  if (Math.abs(v) >= 100) return v.toFixed(0);
  if (Math.abs(v) >= 1) return v.toFixed(2);
  return v.toFixed(3);
}
