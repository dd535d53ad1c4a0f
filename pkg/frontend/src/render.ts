// DOM rendering. Everything displayed comes from API response fields; text
// is inserted via text nodes (never innerHTML), and contract ids become
// links to the summary endpoint.

import { summaryPath } from "./api.js";
import type { AnswerResponse, ApiErrorBody, ChartSpec, TableData, UiTurn } from "./types.js";

const OCS_RE = /(?<![\d./])\d{1,5}\/\d{4}(?![\d/])/g;
const SVG_NS = "http://www.w3.org/2000/svg";

export function linkifyText(doc: Document, text: string): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  let cursor = 0;
  for (const match of text.matchAll(OCS_RE)) {
    const start = match.index ?? 0;
    if (start > cursor) {
      fragment.append(doc.createTextNode(text.slice(cursor, start)));
    }
    const anchor = doc.createElement("a");
    anchor.className = "ocs-link";
    anchor.dataset.ocs = match[0];
    anchor.href = summaryPath(match[0]);
    anchor.textContent = match[0];
    fragment.append(anchor);
    cursor = start + match[0].length;
  }
  if (cursor < text.length) {
    fragment.append(doc.createTextNode(text.slice(cursor)));
  }
  return fragment;
}

export function renderTable(doc: Document, table: TableData): HTMLTableElement {
  const element = doc.createElement("table");
  element.className = "result-table";
  const head = doc.createElement("tr");
  for (const column of table.columns) {
    const th = doc.createElement("th");
    th.textContent = column;
    head.append(th);
  }
  element.append(head);
  for (const row of table.rows) {
    const tr = doc.createElement("tr");
    for (const value of row) {
      const td = doc.createElement("td");
      td.textContent = String(value);
      tr.append(td);
    }
    element.append(tr);
  }
  return element;
}

export function isValidChart(chart: ChartSpec | null): chart is ChartSpec {
  if (chart === null || typeof chart !== "object") {
    return false;
  }
  if (!["bar", "line", "pie"].includes(chart.kind)) {
    return false;
  }
  if (!Array.isArray(chart.x) || !Array.isArray(chart.y)) {
    return false;
  }
  if (chart.x.length === 0 || chart.x.length !== chart.y.length) {
    return false;
  }
  return chart.y.every((v) => typeof v === "number" && Number.isFinite(v));
}

const WIDTH = 420;
const HEIGHT = 240;
const MARGIN = { top: 28, right: 12, bottom: 34, left: 12 };

export function renderChart(doc: Document, chart: ChartSpec): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", `chart chart-${chart.kind}`);
  svg.setAttribute("role", "img");

  const title = doc.createElementNS(SVG_NS, "text");
  title.setAttribute("x", String(WIDTH / 2));
  title.setAttribute("y", "16");
  title.setAttribute("text-anchor", "middle");
  title.setAttribute("class", "chart-title");
  title.textContent = chart.title;
  svg.append(title);

  if (chart.kind === "bar") {
    drawBars(doc, svg, chart);
  } else if (chart.kind === "line") {
    drawLine(doc, svg, chart);
  } else {
    drawPie(doc, svg, chart);
  }
  return svg;
}

function plotArea(): { x0: number; y0: number; width: number; height: number } {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    width: WIDTH - MARGIN.left - MARGIN.right,
    height: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
}

function drawBars(doc: Document, svg: SVGSVGElement, chart: ChartSpec): void {
  const area = plotArea();
  const peak = Math.max(...chart.y, 0);
  const slot = area.width / chart.x.length;
  chart.y.forEach((value, i) => {
    const height = peak > 0 ? (Math.max(value, 0) / peak) * area.height : 0;
    const rect = doc.createElementNS(SVG_NS, "rect");
    rect.setAttribute("class", "bar");
    rect.setAttribute("x", String(area.x0 + i * slot + slot * 0.12));
    rect.setAttribute("y", String(area.y0 + area.height - height));
    rect.setAttribute("width", String(slot * 0.76));
    rect.setAttribute("height", String(height));
    svg.append(rect);
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("class", "bar-label");
    label.setAttribute("x", String(area.x0 + i * slot + slot / 2));
    label.setAttribute("y", String(HEIGHT - 16));
    label.setAttribute("text-anchor", "middle");
    label.textContent = chart.x[i];
    svg.append(label);
  });
}

function drawLine(doc: Document, svg: SVGSVGElement, chart: ChartSpec): void {
  const area = plotArea();
  const peak = Math.max(...chart.y.map(Math.abs), 1);
  const step = chart.x.length > 1 ? area.width / (chart.x.length - 1) : 0;
  const points = chart.y
    .map((value, i) => {
      const px = area.x0 + i * step;
      const py = area.y0 + area.height - (Math.max(value, 0) / peak) * area.height;
      return `${px},${py}`;
    })
    .join(" ");
  const polyline = doc.createElementNS(SVG_NS, "polyline");
  polyline.setAttribute("class", "line-path");
  polyline.setAttribute("fill", "none");
  polyline.setAttribute("points", points);
  svg.append(polyline);
}

function drawPie(doc: Document, svg: SVGSVGElement, chart: ChartSpec): void {
  const total = chart.y.reduce((acc, v) => acc + Math.max(v, 0), 0);
  if (total <= 0) {
    return;
  }
  const cx = WIDTH / 2;
  const cy = MARGIN.top + (HEIGHT - MARGIN.top - MARGIN.bottom) / 2;
  const radius = Math.min(WIDTH, HEIGHT - MARGIN.top - MARGIN.bottom) / 2 - 8;
  let angle = -Math.PI / 2;
  chart.y.forEach((value) => {
    const share = Math.max(value, 0) / total;
    const end = angle + share * 2 * Math.PI;
    const large = share > 0.5 ? 1 : 0;
    const path = doc.createElementNS(SVG_NS, "path");
    path.setAttribute("class", "pie-slice");
    path.setAttribute(
      "d",
      `M ${cx} ${cy} L ${cx + radius * Math.cos(angle)} ${cy + radius * Math.sin(angle)} ` +
        `A ${radius} ${radius} 0 ${large} 1 ${cx + radius * Math.cos(end)} ${cy + radius * Math.sin(end)} Z`,
    );
    svg.append(path);
    angle = end;
  });
}

export function renderAnswer(doc: Document, answer: AnswerResponse): HTMLElement {
  const container = doc.createElement("div");
  container.className = answer.out_of_domain ? "answer refusal" : "answer";

  const text = doc.createElement("p");
  text.className = "answer-text";
  text.append(linkifyText(doc, answer.text));
  container.append(text);

  // Malformed chart specs fall back to the table alone.
  if (isValidChart(answer.chart)) {
    container.append(renderChart(doc, answer.chart));
  }
  if (answer.table !== null) {
    container.append(renderTable(doc, answer.table));
  }

  if (answer.sources.length > 0) {
    const sources = doc.createElement("div");
    sources.className = "sources";
    sources.textContent = `sources: ${answer.sources.join(", ")}`;
    container.append(sources);
  }
  return container;
}

export function renderTurn(
  doc: Document,
  turn: UiTurn,
  onRetry: (question: string) => void,
): HTMLElement {
  const container = doc.createElement("div");
  container.className = "turn";

  const question = doc.createElement("div");
  question.className = "question";
  question.textContent = turn.question;
  container.append(question);

  if (turn.pending) {
    const pending = doc.createElement("div");
    pending.className = "pending";
    pending.textContent = "thinking…";
    container.append(pending);
  } else if (turn.answer) {
    container.append(renderAnswer(doc, turn.answer));
  } else if (turn.error) {
    container.append(renderTurnError(doc, turn, onRetry));
  }
  return container;
}

function renderTurnError(
  doc: Document,
  turn: UiTurn,
  onRetry: (question: string) => void,
): HTMLElement {
  const error = turn.error as ApiErrorBody;
  const element = doc.createElement("div");
  element.className = "error";
  const message = doc.createElement("span");
  message.textContent = `${error.code}: ${error.message}`;
  element.append(message);
  const retry = doc.createElement("button");
  retry.className = "retry";
  retry.type = "button";
  retry.textContent = "retry";
  retry.addEventListener("click", () => onRetry(turn.question));
  element.append(retry);
  return element;
}
