/** Parsers for the race-runner file formats (inputs are never modified). */

export interface Trajectory {
  meta: Record<string, string>;
  p: number[];
  s: number[];
}

/**
 * Parse a trajectory CSV: `# key=value` header comments, a `p,S` column
 * line, then one `p,S` row per breakpoint.
 */
export function parseTrajectoryCsv(text: string): Trajectory {
  const meta: Record<string, string> = {};
  const p: number[] = [];
  const s: number[] = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line === "p,S") continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq > 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    const comma = line.indexOf(",");
    if (comma < 0) throw new Error(`line ${i + 1}: expected 'p,S', got ${line}`);
    const pv = Number(line.slice(0, comma));
    const sv = Number(line.slice(comma + 1));
    if (!Number.isFinite(pv) || !Number.isFinite(sv)) {
      throw new Error(`line ${i + 1}: non-numeric row ${line}`);
    }
    p.push(pv);
    s.push(sv);
  }
  if (p.length === 0) throw new Error("trajectory has no breakpoints");
  return { meta, p, s };
}

export interface HistogramData {
  edges: number[];
  counts: number[];
}

export interface SummaryDoc {
  mean: number;
  histogram?: HistogramData;
  density?: { t: number[]; phi: number[] };
  deltaEstimate?: number;
  nSamples?: number;
}

/** Pull the plot-relevant fields out of a distribution summary document. */
export function parseSummaryJson(text: string): SummaryDoc {
  const doc = JSON.parse(text);
  const mc = doc.montecarlo ?? doc;
  const out: SummaryDoc = { mean: Number(doc.mean ?? mc.mean_input ?? mc.mean) };
  if (!Number.isFinite(out.mean)) throw new Error("summary is missing a mean");
  if (mc.histogram && Array.isArray(mc.histogram.edges)) {
    out.histogram = {
      edges: mc.histogram.edges.map(Number),
      counts: mc.histogram.counts.map(Number),
    };
    out.nSamples = Number(mc.n_samples ?? 0);
  }
  const dens = doc.fourier?.density ?? doc.density;
  if (dens && Array.isArray(dens.t)) {
    out.density = { t: dens.t.map(Number), phi: dens.phi.map(Number) };
  }
  if (doc.delta_estimate !== undefined) out.deltaEstimate = Number(doc.delta_estimate);
  return out;
}
