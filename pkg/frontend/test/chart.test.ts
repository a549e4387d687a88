import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { apply, bandFor, chartModel, DEFAULT_LAYOUT, medianSpacing } from "../src/chart.js";
import { parseCsv, tableToChartData, timeLabelToEpochDays } from "../src/csv.js";
import type { DataRef, SummaryDoc } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function loadChartData() {
  const rows = parseCsv(readFileSync(join(FIXTURES, "data.csv"), "utf-8"));
  return tableToChartData(rows, "date", "price", "company");
}

function loadSummary(): SummaryDoc {
  return JSON.parse(readFileSync(join(FIXTURES, "summary.json"), "utf-8"));
}

describe("csv + chart data", () => {
  it("builds both series from the long table", () => {
    const data = loadChartData();
    expect(data.series.map((s) => s.name).sort()).toEqual(["Apple", "Google"]);
    expect(data.timestamps.length).toBe(132);
    expect(data.timeKind).toBe("temporal");
  });

  it("canonical times match the server convention (epoch days)", () => {
    expect(timeLabelToEpochDays("1970-01-01")).toBe(0);
    expect(timeLabelToEpochDays("2008-01")).toBe(
      Date.UTC(2008, 0, 1) / 86_400_000,
    );
    expect(timeLabelToEpochDays("not a date")).toBeNull();
  });
});

describe("chart model", () => {
  it("renders one path per series, none dimmed without a hover", () => {
    const model = chartModel(loadChartData());
    expect(model.paths.length).toBe(2);
    expect(model.paths.every((p) => !p.dimmed)).toBe(true);
    expect(model.band).toBeNull();
  });

  it("dims only non-referenced series under a hover", () => {
    const ref: DataRef = {
      dimensions: ["Apple"],
      start: timeLabelToEpochDays("2008-01")!,
      end: timeLabelToEpochDays("2008-12")!,
      label: "2008",
      kind: "range",
      patch_ids: [],
    };
    const model = chartModel(loadChartData(), DEFAULT_LAYOUT, ref);
    expect(model.dimmedSeries).toEqual(["Google"]);
  });

  it("early-2008 band stays confined to January on both lines", () => {
    const data = loadChartData();
    const doc = loadSummary();
    const early = doc.sentences.find((s) => s.text.includes("early 2008"))!;
    expect(early).toBeDefined();
    const ref = early.refs[0];
    // both lines referenced: nothing dimmed
    const model = chartModel(data, DEFAULT_LAYOUT, ref);
    expect(model.dimmedSeries).toEqual([]);
    expect(model.band).not.toBeNull();
    const jan1 = apply(model.xScale, timeLabelToEpochDays("2008-01")!);
    const feb1 = apply(model.xScale, timeLabelToEpochDays("2008-02")!);
    expect(model.band!.x0).toBeCloseTo(jan1, 6);
    expect(model.band!.x1).toBeLessThanOrEqual(feb1 + 1e-6);
    expect(model.band!.x1).toBeGreaterThan(model.band!.x0);
  });

  it("bands never leave the rendered x-domain", () => {
    const data = loadChartData();
    const ref: DataRef = {
      dimensions: ["Apple"],
      start: -1e9,
      end: 1e9,
      label: "everything",
      kind: "range",
      patch_ids: [],
    };
    const model = chartModel(data, DEFAULT_LAYOUT, ref);
    const left = apply(model.xScale, model.xScale.domain[0]);
    const right = apply(model.xScale, model.xScale.domain[1]);
    expect(model.band!.x0).toBeGreaterThanOrEqual(left);
    expect(model.band!.x1).toBeLessThanOrEqual(right);
  });

  it("median spacing pads zero-width references", () => {
    const data = loadChartData();
    const spacing = medianSpacing(data.timestamps);
    expect(spacing).toBeGreaterThanOrEqual(28);
    expect(spacing).toBeLessThanOrEqual(31);
    const point: DataRef = {
      dimensions: ["Google"],
      start: data.timestamps[10],
      end: data.timestamps[10],
      label: "",
      kind: "point",
      patch_ids: [],
    };
    const band = bandFor(point, data, chartModel(data).xScale);
    expect(band.x1).toBeGreaterThan(band.x0);
  });
});
