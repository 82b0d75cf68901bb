import type { SiteFeature, SiteGeoJSON } from "./types.js";

/** Fixed linear projection from site coordinates (metres, y up) onto a
 * canvas (pixels, y down), preserving aspect ratio with a margin. No tile
 * service: the GeoJSON is the whole map. */
export class Projection {
  readonly scale: number;
  private readonly offsetX: number;
  private readonly offsetY: number;
  private readonly maxY: number;

  constructor(
    bounds: { minX: number; minY: number; maxX: number; maxY: number },
    width: number,
    height: number,
    margin = 20,
  ) {
    const spanX = Math.max(bounds.maxX - bounds.minX, 1e-9);
    const spanY = Math.max(bounds.maxY - bounds.minY, 1e-9);
    this.scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
    this.offsetX = margin - bounds.minX * this.scale;
    this.offsetY = margin;
    this.maxY = bounds.maxY;
  }

  toCanvas(x: number, y: number): [number, number] {
    return [x * this.scale + this.offsetX, (this.maxY - y) * this.scale + this.offsetY];
  }
}

export function siteBounds(site: SiteGeoJSON): {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
} {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  const eat = (x: number, y: number) => {
    if (x < minX) minX = x;
    if (y < minY) minY = y;
    if (x > maxX) maxX = x;
    if (y > maxY) maxY = y;
  };
  for (const f of site.features) {
    if (f.geometry.type === "Point") {
      const [x, y] = f.geometry.coordinates as number[];
      eat(x, y);
    } else {
      for (const [x, y] of f.geometry.coordinates as number[][]) eat(x, y);
    }
  }
  if (!Number.isFinite(minX)) {
    return { minX: 0, minY: 0, maxX: 1, maxY: 1 };
  }
  return { minX, minY, maxX, maxY };
}

export function featurePoints(site: SiteGeoJSON, kind: string): SiteFeature[] {
  return site.features.filter(
    (f) => f.geometry.type === "Point" && f.properties.kind === kind,
  );
}

export function roads(site: SiteGeoJSON): SiteFeature[] {
  return site.features.filter((f) => f.properties.kind === "road");
}
