#!/usr/bin/env node
/**
 * Figure renderer for race trajectory CSVs and distribution summaries.
 *
 *   trajectory <in.csv> <out.svg> [--stride N] [--log-x] [--title T]
 *                [--xlabel X] [--ylabel Y] [--points-json F]
 *   distribution <in.json> <out.svg> [--title T] [--xlabel X] [--ylabel Y]
 *   batch --out-dir D [--stride N] [--log-x] [--points-json-dir D] <in.csv...>
 *
 * Inputs are never modified. Exit code is 0 only if every requested image
 * was written.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";
import { parseSummaryJson, parseTrajectoryCsv } from "./csv.js";
import { renderDistribution, renderTrajectory } from "./render.js";

interface Flags {
  positional: string[];
  stride: number;
  logX: boolean;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  pointsJson?: string;
  pointsJsonDir?: string;
  outDir?: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = { positional: [], stride: 1, logX: false };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--stride") flags.stride = Number(argv[++i]);
    else if (a === "--log-x") flags.logX = true;
    else if (a === "--title") flags.title = argv[++i];
    else if (a === "--xlabel") flags.xLabel = argv[++i];
    else if (a === "--ylabel") flags.yLabel = argv[++i];
    else if (a === "--points-json") flags.pointsJson = argv[++i];
    else if (a === "--points-json-dir") flags.pointsJsonDir = argv[++i];
    else if (a === "--out-dir") flags.outDir = argv[++i];
    else if (a.startsWith("--")) throw new Error(`unknown flag ${a}`);
    else flags.positional.push(a);
  }
  if (!Number.isInteger(flags.stride) || flags.stride < 1) {
    throw new Error("--stride must be a positive integer");
  }
  return flags;
}

function writePointsJson(path: string, render: { buckets: unknown; points: Array<[number, number]> }): void {
  writeFileSync(path, JSON.stringify({ points: render.points, buckets: render.buckets }));
}

function doTrajectory(input: string, output: string, flags: Flags): void {
  const traj = parseTrajectoryCsv(readFileSync(input, "utf8"));
  const render = renderTrajectory(traj, {
    stride: flags.stride,
    logX: flags.logX,
    title: flags.title,
    xLabel: flags.xLabel,
    yLabel: flags.yLabel,
  });
  writeFileSync(output, render.svg);
  if (flags.pointsJson) writePointsJson(flags.pointsJson, render);
  console.error(`wrote ${output} (${render.points.length} vertices)`);
}

function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "trajectory") {
      const flags = parseFlags(rest);
      const [input, output] = flags.positional;
      if (!input || !output) throw new Error("usage: trajectory <in.csv> <out.svg>");
      doTrajectory(input, output, flags);
      return 0;
    }
    if (command === "distribution") {
      const flags = parseFlags(rest);
      const [input, output] = flags.positional;
      if (!input || !output) throw new Error("usage: distribution <in.json> <out.svg>");
      const doc = parseSummaryJson(readFileSync(input, "utf8"));
      writeFileSync(output, renderDistribution(doc, { title: flags.title, xLabel: flags.xLabel, yLabel: flags.yLabel }));
      console.error(`wrote ${output}`);
      return 0;
    }
    if (command === "batch") {
      const flags = parseFlags(rest);
      if (!flags.outDir) throw new Error("batch needs --out-dir");
      if (flags.positional.length === 0) throw new Error("batch needs input CSVs");
      mkdirSync(flags.outDir, { recursive: true });
      if (flags.pointsJsonDir) mkdirSync(flags.pointsJsonDir, { recursive: true });
      for (const input of flags.positional) {
        const stem = basename(input).replace(/\.csv$/i, "");
        const single: Flags = {
          ...flags,
          pointsJson: flags.pointsJsonDir
            ? join(flags.pointsJsonDir, `${stem}.points.json`)
            : undefined,
        };
        doTrajectory(input, join(flags.outDir, `${stem}.svg`), single);
      }
      return 0;
    }
    throw new Error(`unknown command ${command ?? "(none)"}; expected trajectory, distribution, or batch`);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
