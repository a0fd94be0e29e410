import { SummaryDoc, Trajectory } from "./csv.js";
import { Bucket, bucketExtrema, downsample } from "./downsample.js";
import { SvgCanvas, makeFrame } from "./svg.js";

export interface TrajectoryJob {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  stride?: number;
  logX?: boolean;
  width?: number;
  height?: number;
}

export interface TrajectoryRender {
  svg: string;
  points: Array<[number, number]>;
  buckets: Bucket[];
}

export function renderTrajectory(traj: Trajectory, job: TrajectoryJob = {}): TrajectoryRender {
  const stride = job.stride ?? 1;
  const points = downsample(traj.p, traj.s, stride);
  const buckets = bucketExtrema(traj.p, traj.s, stride);
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const [, y] of points) {
    if (y < yMin) yMin = y;
    if (y > yMax) yMax = y;
  }
  yMin = Math.min(yMin, 0);
  yMax = Math.max(yMax, 0);
  const frame = makeFrame(traj.p[0], traj.p[traj.p.length - 1], yMin, yMax, {
    logX: job.logX,
    width: job.width,
    height: job.height,
  });
  const canvas = new SvgCanvas(frame);
  const family = traj.meta["family"] ?? "race";
  canvas.axes(job.xLabel ?? "x", job.yLabel ?? "S(x)", job.title ?? `${family} up to ${traj.meta["xmax"] ?? "?"}`);
  canvas.polyline(points);
  return { svg: canvas.render(), points, buckets };
}

export interface DistributionJob {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  width?: number;
  height?: number;
}

export function renderDistribution(doc: SummaryDoc, job: DistributionJob = {}): string {
  let xMin: number;
  let xMax: number;
  let yMax = 0;
  let heights: number[] = [];
  if (doc.histogram && doc.nSamples) {
    const { edges, counts } = doc.histogram;
    const width = edges[1] - edges[0];
    heights = counts.map((c) => c / (doc.nSamples! * width));
    xMin = edges[0];
    xMax = edges[edges.length - 1];
    yMax = Math.max(...heights);
  } else if (doc.density) {
    xMin = doc.density.t[0];
    xMax = doc.density.t[doc.density.t.length - 1];
  } else {
    // point mass: a single spike at the mean
    xMin = doc.mean - 1;
    xMax = doc.mean + 1;
    yMax = 1;
  }
  if (doc.density) yMax = Math.max(yMax, ...doc.density.phi);
  const frame = makeFrame(xMin, xMax, 0, yMax || 1, { width: job.width, height: job.height });
  const canvas = new SvgCanvas(frame);
  const delta = doc.deltaEstimate !== undefined ? `  delta=${doc.deltaEstimate.toFixed(4)}` : "";
  canvas.axes(job.xLabel ?? "t", job.yLabel ?? "density", job.title ?? `limiting distribution${delta}`);
  if (heights.length && doc.histogram) canvas.bars(doc.histogram.edges, heights);
  if (doc.density) {
    canvas.polyline(
      doc.density.t.map((tv, i) => [tv, doc.density!.phi[i]] as [number, number]),
      "#ff7f0e",
      1.5,
    );
  }
  if (!heights.length && !doc.density) {
    canvas.polyline(
      [
        [doc.mean, 0],
        [doc.mean, yMax],
      ],
      "#1f77b4",
      2,
    );
  }
  canvas.vline(doc.mean);
  return canvas.render();
}
