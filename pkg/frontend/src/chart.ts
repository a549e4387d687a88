/** Pure chart geometry: scales, polylines, and hover-highlight overlays.
 *
 * All insight content comes from the server; this module only maps server
 * truth (series values and data references) onto pixels.
 */

import type { ChartData } from "./csv.js";
import type { DataRef } from "./types.js";

export interface Scale {
  domain: [number, number];
  range: [number, number];
}

export function makeScale(domain: [number, number], range: [number, number]): Scale {
  return { domain, range };
}

export function apply(scale: Scale, v: number): number {
  const [d0, d1] = scale.domain;
  const [r0, r1] = scale.range;
  if (d1 === d0) return (r0 + r1) / 2;
  const clamped = Math.min(Math.max(v, Math.min(d0, d1)), Math.max(d0, d1));
  return r0 + ((clamped - d0) / (d1 - d0)) * (r1 - r0);
}

export interface ChartLayout {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 720,
  height: 360,
  margin: { top: 24, right: 16, bottom: 32, left: 56 },
};

export interface SeriesPath {
  name: string;
  path: string; // SVG path data
  dimmed: boolean;
}

export interface HighlightBand {
  x0: number;
  x1: number;
}

export interface ChartModel {
  xScale: Scale;
  yScale: Scale;
  paths: SeriesPath[];
  band: HighlightBand | null;
  dimmedSeries: string[];
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
}

function extent(values: number[]): [number, number] {
  return [Math.min(...values), Math.max(...values)];
}

/** Median spacing between samples: the width used for zero-width bands. */
export function medianSpacing(timestamps: number[]): number {
  if (timestamps.length < 2) return 1;
  const gaps = timestamps
    .slice(1)
    .map((t, i) => t - timestamps[i])
    .sort((a, b) => a - b);
  return gaps[Math.floor(gaps.length / 2)];
}

export function pathFor(points: [number, number][], xScale: Scale, yScale: Scale): string {
  return points
    .map(([t, v], i) => `${i === 0 ? "M" : "L"}${apply(xScale, t).toFixed(2)},${apply(yScale, v).toFixed(2)}`)
    .join("");
}

/** Band pixel geometry for one data reference, clamped to the x-domain. */
export function bandFor(ref: DataRef, data: ChartData, xScale: Scale): HighlightBand {
  const [d0, d1] = xScale.domain;
  let start = Math.max(ref.start, d0);
  let end = Math.min(ref.end, d1);
  if (end <= start) {
    // zero-width reference: pad to one median sample step
    end = Math.min(start + medianSpacing(data.timestamps), d1);
  }
  return { x0: apply(xScale, start), x1: apply(xScale, end) };
}

export function chartModel(
  data: ChartData,
  layout: ChartLayout = DEFAULT_LAYOUT,
  hoverRef: DataRef | null = null,
): ChartModel {
  const { width, height, margin } = layout;
  const xScale = makeScale(extent(data.timestamps), [margin.left, width - margin.right]);
  const allValues = data.series.flatMap((s) => s.points.map(([, v]) => v));
  const [lo, hi] = extent(allValues);
  const pad = (hi - lo || 1) * 0.05;
  const yScale = makeScale([lo - pad, hi + pad], [height - margin.bottom, margin.top]);

  const referenced = new Set(hoverRef ? hoverRef.dimensions : data.series.map((s) => s.name));
  const paths: SeriesPath[] = data.series.map((s) => ({
    name: s.name,
    path: pathFor(s.points, xScale, yScale),
    dimmed: hoverRef !== null && !referenced.has(s.name),
  }));

  const band = hoverRef ? bandFor(hoverRef, data, xScale) : null;

  const tickCount = Math.min(8, data.timestamps.length);
  const step = Math.max(1, Math.floor(data.timestamps.length / tickCount));
  const xTicks = data.timestamps
    .map((t, i) => ({ t, i }))
    .filter(({ i }) => i % step === 0)
    .map(({ t, i }) => ({ x: apply(xScale, t), label: data.labels[i] }));
  const yTicks = Array.from({ length: 5 }, (_, k) => {
    const v = lo + ((hi - lo) * k) / 4;
    return { y: apply(yScale, v), label: v.toPrecision(3) };
  });

  return {
    xScale,
    yScale,
    paths,
    band,
    dimmedSeries: paths.filter((p) => p.dimmed).map((p) => p.name),
    xTicks,
    yTicks,
  };
}
