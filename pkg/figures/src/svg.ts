/** Minimal hand-rolled SVG plotting: axes, ticks, polylines, bars. */

export interface PlotFrame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  logX: boolean;
}

export function makeFrame(
  xMin: number,
  xMax: number,
  yMin: number,
  yMax: number,
  opts: { width?: number; height?: number; logX?: boolean } = {},
): PlotFrame {
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  const pad = 0.04 * (yMax - yMin);
  return {
    width: opts.width ?? 900,
    height: opts.height ?? 480,
    margin: { top: 34, right: 16, bottom: 42, left: 64 },
    xMin,
    xMax,
    yMin: yMin - pad,
    yMax: yMax + pad,
    logX: opts.logX ?? false,
  };
}

function xPix(f: PlotFrame, x: number): number {
  const t = f.logX
    ? (Math.log(x) - Math.log(f.xMin)) / (Math.log(f.xMax) - Math.log(f.xMin))
    : (x - f.xMin) / (f.xMax - f.xMin);
  return f.margin.left + t * (f.width - f.margin.left - f.margin.right);
}

function yPix(f: PlotFrame, y: number): number {
  const t = (y - f.yMin) / (f.yMax - f.yMin);
  return f.height - f.margin.bottom - t * (f.height - f.margin.top - f.margin.bottom);
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(Math.round(v * 1000) / 1000);
}

export function ticks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const mult = [1, 2, 5, 10].find((m) => span / (step * m) <= n) ?? 10;
  const s = step * mult;
  const first = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += s) out.push(v);
  return out;
}

export class SvgCanvas {
  private parts: string[] = [];

  constructor(readonly frame: PlotFrame) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" ` +
        `viewBox="0 0 ${frame.width} ${frame.height}" font-family="sans-serif" font-size="12">`,
      `<rect width="${frame.width}" height="${frame.height}" fill="white"/>`,
    );
  }

  axes(xLabel: string, yLabel: string, title: string): void {
    const f = this.frame;
    const x0 = f.margin.left;
    const x1 = f.width - f.margin.right;
    const y0 = f.height - f.margin.bottom;
    const y1 = f.margin.top;
    for (const tv of ticks(f.yMin, f.yMax)) {
      const py = yPix(f, tv);
      this.parts.push(
        `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#ddd"/>`,
        `<text x="${x0 - 6}" y="${py + 4}" text-anchor="end">${fmt(tv)}</text>`,
      );
    }
    const xt = f.logX
      ? ticks(Math.log10(f.xMin), Math.log10(f.xMax)).map((e) => Math.pow(10, e))
      : ticks(f.xMin, f.xMax);
    for (const tv of xt) {
      const px = xPix(f, tv);
      this.parts.push(
        `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="#444"/>`,
        `<text x="${px}" y="${y0 + 18}" text-anchor="middle">${fmt(tv)}</text>`,
      );
    }
    if (f.yMin < 0 && f.yMax > 0) {
      const py = yPix(f, 0);
      this.parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#999"/>`);
    }
    this.parts.push(
      `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#444"/>`,
      `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#444"/>`,
      `<text x="${(x0 + x1) / 2}" y="${f.height - 8}" text-anchor="middle">${xLabel}</text>`,
      `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" transform="rotate(-90 16 ${(y0 + y1) / 2})">${yLabel}</text>`,
      `<text x="${(x0 + x1) / 2}" y="20" text-anchor="middle" font-size="14">${escapeXml(title)}</text>`,
    );
  }

  polyline(points: Array<[number, number]>, color = "#1f77b4", width = 1): void {
    const f = this.frame;
    const coords = points
      .map(([x, y]) => `${xPix(f, x).toFixed(2)},${yPix(f, y).toFixed(2)}`)
      .join(" ");
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="${width}"/>`,
    );
  }

  bars(edges: number[], heights: number[], color = "#9ecae1"): void {
    const f = this.frame;
    for (let i = 0; i < heights.length; i++) {
      if (heights[i] <= 0) continue;
      const px0 = xPix(f, edges[i]);
      const px1 = xPix(f, edges[i + 1]);
      const py = yPix(f, heights[i]);
      const base = yPix(f, 0);
      this.parts.push(
        `<rect x="${px0.toFixed(2)}" y="${py.toFixed(2)}" width="${(px1 - px0).toFixed(2)}" ` +
          `height="${(base - py).toFixed(2)}" fill="${color}"/>`,
      );
    }
  }

  vline(x: number, color = "#d62728"): void {
    const f = this.frame;
    const px = xPix(f, x);
    this.parts.push(
      `<line x1="${px}" y1="${yPix(f, f.yMax)}" x2="${px}" y2="${yPix(f, f.yMin)}" ` +
        `stroke="${color}" stroke-dasharray="4 3"/>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
