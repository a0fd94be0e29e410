/** Min/max-preserving downsampling for long trajectory polylines. */

export interface Bucket {
  xFirst: number;
  yFirst: number;
  xMin: number;
  yMin: number;
  xMax: number;
  yMax: number;
  xLast: number;
  yLast: number;
}

/**
 * Split the series into consecutive buckets of `stride` rows and record the
 * first, minimum, maximum, and last point of each. The per-bucket extrema
 * equal the exact extrema of the bucket's rows.
 */
export function bucketExtrema(x: number[], y: number[], stride: number): Bucket[] {
  if (x.length !== y.length) throw new Error("x and y lengths differ");
  if (stride < 1 || !Number.isInteger(stride)) throw new Error("stride must be a positive integer");
  const out: Bucket[] = [];
  for (let start = 0; start < x.length; start += stride) {
    const end = Math.min(start + stride, x.length);
    let iMin = start;
    let iMax = start;
    for (let i = start + 1; i < end; i++) {
      if (y[i] < y[iMin]) iMin = i;
      if (y[i] > y[iMax]) iMax = i;
    }
    out.push({
      xFirst: x[start],
      yFirst: y[start],
      xMin: x[iMin],
      yMin: y[iMin],
      xMax: x[iMax],
      yMax: y[iMax],
      xLast: x[end - 1],
      yLast: y[end - 1],
    });
  }
  return out;
}

/**
 * Polyline vertices for rendering: first, then min/max in x order, then last
 * point of every bucket (duplicates dropped). Extrema survive exactly.
 */
export function downsample(x: number[], y: number[], stride: number): Array<[number, number]> {
  if (stride <= 1) return x.map((xv, i) => [xv, y[i]]);
  const pts: Array<[number, number]> = [];
  for (const b of bucketExtrema(x, y, stride)) {
    const mid: Array<[number, number]> =
      b.xMin <= b.xMax
        ? [
            [b.xMin, b.yMin],
            [b.xMax, b.yMax],
          ]
        : [
            [b.xMax, b.yMax],
            [b.xMin, b.yMin],
          ];
    for (const pt of [[b.xFirst, b.yFirst] as [number, number], ...mid, [b.xLast, b.yLast] as [number, number]]) {
      const prev = pts[pts.length - 1];
      if (!prev || prev[0] !== pt[0] || prev[1] !== pt[1]) pts.push(pt);
    }
  }
  return pts;
}
