/** Minimal RFC 4180 CSV parsing and the time-axis conventions the server uses. */

export function parseCsv(text: string): Record<string, string>[] {
  const rows: string[][] = [];
  let row: string[] = [];
  let field = "";
  let inQuotes = false;
  const push = () => {
    row.push(field);
    field = "";
  };
  const pushRow = () => {
    if (row.length > 1 || row[0] !== "") rows.push(row);
    row = [];
  };
  for (let i = 0; i < text.length; i++) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += c;
      }
    } else if (c === '"') {
      inQuotes = true;
    } else if (c === ",") {
      push();
    } else if (c === "\n") {
      push();
      pushRow();
    } else if (c !== "\r") {
      field += c;
    }
  }
  if (field.length || row.length) {
    push();
    pushRow();
  }
  if (rows.length < 2) return [];
  const header = rows[0];
  return rows.slice(1).map((cells) => {
    const out: Record<string, string> = {};
    header.forEach((name, i) => (out[name] = cells[i] ?? ""));
    return out;
  });
}

const MS_PER_DAY = 86_400_000;

/** Parse YYYY / YYYY-MM / YYYY-MM-DD to epoch days, mirroring the server. */
export function timeLabelToEpochDays(label: string): number | null {
  const text = label.trim().split("T")[0];
  let m = /^(\d{4})$/.exec(text);
  if (m) return Date.UTC(+m[1], 0, 1) / MS_PER_DAY;
  m = /^(\d{4})-(\d{1,2})$/.exec(text);
  if (m) return Date.UTC(+m[1], +m[2] - 1, 1) / MS_PER_DAY;
  m = /^(\d{4})-(\d{1,2})-(\d{1,2})$/.exec(text);
  if (m) return Date.UTC(+m[1], +m[2] - 1, +m[3]) / MS_PER_DAY;
  return null;
}

export interface Series {
  name: string;
  /** [canonical time, value] pairs, time-sorted; gaps are dropped for drawing */
  points: [number, number][];
}

export interface ChartData {
  series: Series[];
  labels: string[];
  timestamps: number[];
  timeKind: "temporal" | "ordinal";
}

/** Build drawable series from rows, wide or long, matching server semantics. */
export function tableToChartData(
  rows: Record<string, string>[],
  xField: string,
  yField: string,
  colorField?: string,
): ChartData {
  const labels: string[] = [];
  const seen = new Set<string>();
  for (const row of rows) {
    const label = (row[xField] ?? "").trim();
    if (!seen.has(label)) {
      seen.add(label);
      labels.push(label);
    }
  }
  const parsed = labels.map(timeLabelToEpochDays);
  const temporal = parsed.every((v) => v !== null);
  const order = labels
    .map((label, i) => ({ label, t: temporal ? (parsed[i] as number) : i }))
    .sort((a, b) => a.t - b.t);
  const sortedLabels = order.map((o) => o.label);
  const timestamps = order.map((o, i) => (temporal ? o.t : i));
  const rank = new Map(sortedLabels.map((label, i) => [label, i]));

  const values = new Map<string, (number | null)[]>();
  const ensure = (name: string) => {
    if (!values.has(name)) values.set(name, sortedLabels.map(() => null));
    return values.get(name)!;
  };
  if (colorField) {
    for (const row of rows) {
      const name = (row[colorField] ?? "").trim();
      const v = parseFloat(row[yField]);
      const at = rank.get((row[xField] ?? "").trim());
      if (name && at !== undefined && Number.isFinite(v)) ensure(name)[at] = v;
    }
  } else {
    for (const row of rows) {
      const v = parseFloat(row[yField]);
      const at = rank.get((row[xField] ?? "").trim());
      if (at !== undefined && Number.isFinite(v)) ensure(yField)[at] = v;
    }
  }
  const series: Series[] = [...values.entries()].map(([name, vals]) => ({
    name,
    points: vals.flatMap((v, i) => (v === null ? [] : [[timestamps[i], v] as [number, number]])),
  }));
  return { series, labels: sortedLabels, timestamps, timeKind: temporal ? "temporal" : "ordinal" };
}
