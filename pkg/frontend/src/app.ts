/** Three-view application: chart, summary, chat. */

import { Client } from "./api.js";
import { ChartModel, DEFAULT_LAYOUT, chartModel } from "./chart.js";
import { ChartData, parseCsv, tableToChartData } from "./csv.js";
import { activeHighlight, summaryViewModel } from "./summary.js";
import type { ChartSpecSubset, DataRef, SummaryDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SERIES_COLORS = ["#3366cc", "#dc3912", "#109618", "#ff9900", "#990099", "#0099c6"];

export interface ViewState {
  jobId: string | null;
  summary: SummaryDoc | null;
  hovered: number | null;
  chartData: ChartData | null;
  chartTitle: string;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function renderChartSvg(model: ChartModel, data: ChartData, title: string): SVGElement {
  const { width, height, margin } = DEFAULT_LAYOUT;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "chart",
  });
  svg.appendChild(
    svgEl("text", { x: String(width / 2), y: "16", "text-anchor": "middle", class: "title" }),
  ).textContent = title;

  for (const tick of model.xTicks) {
    const g = svgEl("g", { class: "x-tick" });
    g.appendChild(svgEl("line", {
      x1: String(tick.x), x2: String(tick.x),
      y1: String(height - margin.bottom), y2: String(height - margin.bottom + 4),
      stroke: "#888",
    }));
    const label = svgEl("text", {
      x: String(tick.x), y: String(height - margin.bottom + 16),
      "text-anchor": "middle", "font-size": "10",
    });
    label.textContent = tick.label;
    g.appendChild(label);
    svg.appendChild(g);
  }
  for (const tick of model.yTicks) {
    const label = svgEl("text", {
      x: String(margin.left - 6), y: String(tick.y + 3),
      "text-anchor": "end", "font-size": "10",
    });
    label.textContent = tick.label;
    svg.appendChild(label);
  }

  if (model.band) {
    svg.appendChild(svgEl("rect", {
      class: "highlight-band",
      x: String(model.band.x0),
      width: String(Math.max(model.band.x1 - model.band.x0, 1)),
      y: String(margin.top),
      height: String(height - margin.top - margin.bottom),
      fill: "rgba(255, 200, 0, 0.25)",
    }));
  }

  model.paths.forEach((p, i) => {
    svg.appendChild(svgEl("path", {
      d: p.path,
      fill: "none",
      stroke: SERIES_COLORS[i % SERIES_COLORS.length],
      "stroke-width": "2",
      opacity: p.dimmed ? "0.2" : "1",
      class: `series series-${p.name}${p.dimmed ? " dimmed" : ""}`,
    }));
    const labelY = 28 + i * 14;
    const legend = svgEl("text", {
      x: String(width - margin.right - 4), y: String(labelY),
      "text-anchor": "end", "font-size": "11",
      fill: SERIES_COLORS[i % SERIES_COLORS.length],
    });
    legend.textContent = p.name;
    svg.appendChild(legend);
  });
  return svg;
}

export class App {
  state: ViewState = {
    jobId: null,
    summary: null,
    hovered: null,
    chartData: null,
    chartTitle: "",
  };

  constructor(
    private client: Client,
    private root: HTMLElement,
  ) {}

  mount(): void {
    this.root.innerHTML = "";
    const inputView = el("div", { class: "input-view" });
    const specBox = el("textarea", { id: "spec", rows: "8", placeholder: "Chart spec (JSON)" });
    const dataBox = el("textarea", { id: "data", rows: "8", placeholder: "Data table (CSV)" });
    const seedBox = el("input", { id: "seed", type: "number", value: "7" });
    const submit = el("button", { id: "submit" }, "Generate summary");
    const status = el("div", { id: "status" });
    inputView.append(specBox, dataBox, el("label", {}, "Seed: "), seedBox, submit, status);

    const chartView = el("div", { id: "chart-view", class: "chart-view" });
    const summaryView = el("div", { id: "summary-view", class: "summary-view" });
    const chatView = el("div", { id: "chat-view", class: "chat-view" });
    const chatLog = el("div", { id: "chat-log" });
    const chatBox = el("input", { id: "chat-input", placeholder: "Refine the summary..." });
    const chatSend = el("button", { id: "chat-send", disabled: "true" }, "Send");
    chatView.append(chatLog, chatBox, chatSend);
    this.root.append(inputView, chartView, summaryView, chatView);

    submit.addEventListener("click", async () => {
      const spec = specBox.value.trim();
      const csv = dataBox.value.trim();
      if (!spec) {
        status.textContent = "spec required";
        return;
      }
      try {
        this.loadChart(spec, csv || null);
        status.textContent = "submitted...";
        const job = await this.client.submitJob(spec, csv || null, {
          seed: Number(seedBox.value) || 0,
        });
        this.state.jobId = job.id;
        const final = await this.client.waitForJob(job.id, 2000, (s) => {
          status.textContent = `job ${s.id}: ${s.state}`;
        });
        if (final.state === "failed") {
          status.textContent = `failed: ${final.error}`;
          return;
        }
        this.state.summary = await this.client.summary(job.id);
        (chatSend as HTMLButtonElement).disabled = false;
        status.textContent = `job ${job.id}: done`;
        this.redraw();
      } catch (err) {
        status.textContent = String(err);
      }
    });

    chatSend.addEventListener("click", async () => {
      const message = (chatBox as HTMLInputElement).value.trim();
      if (!message || !this.state.jobId) return;
      chatLog.appendChild(el("div", { class: "turn user" }, message));
      (chatBox as HTMLInputElement).value = "";
      try {
        const resp = await this.client.chat(this.state.jobId, message);
        this.state.summary = resp.summary;
        chatLog.appendChild(
          el("div", { class: "turn system" }, `updated (version ${resp.version})`),
        );
        this.redraw();
      } catch (err) {
        chatLog.appendChild(el("div", { class: "turn error" }, String(err)));
      }
    });
  }

  loadChart(specText: string, csv: string | null): void {
    const spec = JSON.parse(specText) as ChartSpecSubset;
    const rows = csv ? parseCsv(csv) : ((spec.data?.values ?? []) as Record<string, string>[]);
    const enc = spec.encoding;
    this.state.chartData = tableToChartData(
      rows,
      enc.x.field,
      enc.y.field,
      enc.color?.field,
    );
    const title = spec.title;
    this.state.chartTitle =
      typeof title === "string" ? title : (title?.text ?? "");
    this.redraw();
  }

  setHover(index: number | null): void {
    this.state.hovered = index;
    this.redraw();
  }

  currentHighlight(): DataRef | null {
    if (!this.state.summary) return null;
    return activeHighlight(this.state.summary, this.state.hovered);
  }

  redraw(): void {
    const chartView = this.root.querySelector("#chart-view");
    if (chartView && this.state.chartData) {
      chartView.innerHTML = "";
      const model = chartModel(this.state.chartData, DEFAULT_LAYOUT, this.currentHighlight());
      chartView.appendChild(renderChartSvg(model, this.state.chartData, this.state.chartTitle));
    }
    const summaryView = this.root.querySelector("#summary-view");
    if (summaryView && this.state.summary) {
      summaryView.innerHTML = "";
      for (const sv of summaryViewModel(this.state.summary, this.state.hovered)) {
        const span = el("span", { class: sv.classes.join(" "), "data-index": String(sv.index) });
        span.textContent = sv.text + " ";
        if (sv.underlined) {
          span.addEventListener("mouseenter", () => this.setHover(sv.index));
          span.addEventListener("mouseleave", () => this.setHover(null));
        }
        summaryView.appendChild(span);
      }
    }
  }
}

export function bootstrap(baseUrl: string, root: HTMLElement): App {
  const app = new App(new Client(baseUrl), root);
  app.mount();
  return app;
}
