/** Minimal deterministic SVG scene building: no DOM, no dependencies. */

export interface Range {
  min: number;
  max: number;
}

/** Data range padded by 5% on both sides (degenerate ranges get a unit pad). */
export function padRange(values: number[]): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (!Number.isFinite(min) || !Number.isFinite(max)) return { min: -1, max: 1 };
  if (min === max) return { min: min - 1, max: max + 1 };
  const pad = 0.05 * (max - min);
  return { min: min - pad, max: max + pad };
}

export function scale(range: Range, pixelLo: number, pixelHi: number) {
  const k = (pixelHi - pixelLo) / (range.max - range.min);
  return (v: number) => pixelLo + (v - range.min) * k;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return parseFloat(v.toPrecision(4)).toString();
  return v.toExponential(2);
}

export function ticks(range: Range, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i += 1) {
    out.push(range.min + ((range.max - range.min) * i) / (count - 1));
  }
  return out;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", width = 1): void {
    this.raw(
      `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: [number, number][], stroke: string, width = 1.5): void {
    const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.raw(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  circle(x: number, y: number, radius: number, fill: string): void {
    this.raw(`<circle cx="${r(x)}" cy="${r(y)}" r="${radius}" fill="${fill}"/>`);
  }

  cross(x: number, y: number, size: number, stroke: string): void {
    this.line(x - size, y - size, x + size, y + size, stroke, 1.5);
    this.line(x - size, y + size, x + size, y - size, stroke, 1.5);
  }

  text(x: number, y: number, content: string, size = 11, anchor = "start", fill = "#111"): void {
    this.raw(
      `<text x="${r(x)}" y="${r(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}" font-family="Helvetica,Arial,sans-serif">${escapeXml(content)}</text>`,
    );
  }

  /**
   * Framed axes with tick labels; returns the (x, y) data-to-pixel maps.
   */
  axes(
    box: { x: number; y: number; w: number; h: number },
    xRange: Range,
    yRange: Range,
    xLabel: string,
    yLabel: string,
  ): { sx: (v: number) => number; sy: (v: number) => number } {
    const sx = scale(xRange, box.x, box.x + box.w);
    const sy = scale(yRange, box.y + box.h, box.y);
    this.raw(
      `<rect x="${box.x}" y="${box.y}" width="${box.w}" height="${box.h}" fill="none" stroke="#666"/>`,
    );
    for (const t of ticks(xRange)) {
      const px = sx(t);
      this.line(px, box.y + box.h, px, box.y + box.h + 4, "#666");
      this.text(px, box.y + box.h + 16, fmtTick(t), 9, "middle", "#444");
    }
    for (const t of ticks(yRange)) {
      const py = sy(t);
      this.line(box.x - 4, py, box.x, py, "#666");
      this.text(box.x - 6, py + 3, fmtTick(t), 9, "end", "#444");
    }
    this.text(box.x + box.w / 2, box.y + box.h + 30, xLabel, 11, "middle");
    this.text(box.x - 44, box.y - 8, yLabel, 11, "start");
    return { sx, sy };
  }

  /** Serialize with an embedded JSON metadata block. */
  render(metadata: unknown): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<metadata id="skinlab-inputs">${escapeXml(JSON.stringify(metadata))}</metadata>\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function r(v: number): string {
  return (Math.round(v * 100) / 100).toString();
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
