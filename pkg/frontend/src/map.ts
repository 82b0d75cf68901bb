import { Projection, featurePoints, roads, siteBounds } from "./projection.js";
import type { SessionViewModel } from "./model.js";
import type { SiteGeoJSON } from "./types.js";

const COLORS = {
  road: "#555",
  residential: "#3fb8af",
  gate: "#c7a948",
  parkingFree: "#9fb4c7",
  parkingBusy: "#e07a5f",
  ev: "#f2c11e",
  gasoline: "#4a90d9",
  charging: "#36c26e",
};

/** Canvas renderer for the static site plus live vehicle markers (EVs
 * yellow, gasoline blue, charging ringed green; ports shown as an
 * occupancy arc per parking area). */
export class SiteMap {
  private proj: Projection;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly site: SiteGeoJSON,
  ) {
    this.proj = new Projection(siteBounds(site), canvas.width, canvas.height);
  }

  render(model: SessionViewModel): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.fillStyle = "#11151a";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    ctx.strokeStyle = COLORS.road;
    ctx.lineWidth = 3;
    for (const road of roads(this.site)) {
      const coords = road.geometry.coordinates as number[][];
      ctx.beginPath();
      coords.forEach(([x, y], i) => {
        const [cx, cy] = this.proj.toCanvas(x, y);
        if (i === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      });
      ctx.stroke();
    }

    for (const f of featurePoints(this.site, "residential")) {
      this.dot(ctx, f.geometry.coordinates as number[], 7, COLORS.residential);
    }
    for (const f of featurePoints(this.site, "gate")) {
      this.diamond(ctx, f.geometry.coordinates as number[], 7, COLORS.gate);
    }
    for (const f of featurePoints(this.site, "parking")) {
      const areaId = String(f.properties.area_id ?? "");
      const status = model.areas.get(areaId);
      const [x, y] = f.geometry.coordinates as number[];
      const [cx, cy] = this.proj.toCanvas(x, y);
      const busy = status && status.ports_total > 0
        ? status.ports_occupied / status.ports_total
        : 0;
      ctx.fillStyle = COLORS.parkingFree;
      ctx.fillRect(cx - 13, cy - 13, 26, 26);
      if (busy > 0) {
        ctx.fillStyle = COLORS.parkingBusy;
        ctx.fillRect(cx - 13, cy - 13 + 26 * (1 - busy), 26, 26 * busy);
      }
      ctx.strokeStyle = "#ddd";
      ctx.strokeRect(cx - 13, cy - 13, 26, 26);
      ctx.fillStyle = "#ddd";
      ctx.font = "11px sans-serif";
      ctx.textAlign = "center";
      const label = status
        ? `${areaId} ${status.ports_occupied}/${status.ports_total}`
        : areaId;
      ctx.fillText(label, cx, cy - 18);
    }

    for (const v of model.vehicles.values()) {
      const [cx, cy] = this.proj.toCanvas(v.x, v.y);
      if (v.charging) {
        ctx.strokeStyle = COLORS.charging;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(cx, cy, 6, 0, Math.PI * 2);
        ctx.stroke();
      }
      ctx.fillStyle = v.kind === "EV" ? COLORS.ev : COLORS.gasoline;
      ctx.beginPath();
      ctx.arc(cx, cy, 3.5, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  private dot(ctx: CanvasRenderingContext2D, xy: number[], r: number, color: string): void {
    const [cx, cy] = this.proj.toCanvas(xy[0], xy[1]);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, Math.PI * 2);
    ctx.fill();
  }

  private diamond(ctx: CanvasRenderingContext2D, xy: number[], r: number, color: string): void {
    const [cx, cy] = this.proj.toCanvas(xy[0], xy[1]);
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.moveTo(cx, cy - r);
    ctx.lineTo(cx + r, cy);
    ctx.lineTo(cx, cy + r);
    ctx.lineTo(cx - r, cy);
    ctx.closePath();
    ctx.fill();
  }
}
