/** What-if sweep: value generation (validated before any request goes out)
 * and an SVG chart of p_positive vs the swept value, with the 0.5 decision
 * threshold marked, per-point errors drawn as gaps, and clickable markers. */

import type { Prediction, WhatIfResponse } from "./api.js";

export const SWEEP_LIMIT = 200;

/** Inclusive arithmetic sweep; throws before any network request when the
 * parameters cannot produce a valid sweep. */
export function sweepValues(from: number, to: number, step: number): number[] {
  if (!Number.isFinite(from) || !Number.isFinite(to) || !Number.isFinite(step)) {
    throw new Error("sweep bounds and step must be numbers");
  }
  if (step <= 0) {
    throw new Error("step must be > 0");
  }
  if (to < from) {
    throw new Error("sweep end must be >= start");
  }
  const count = Math.floor((to - from) / step + 1e-9) + 1;
  if (count > SWEEP_LIMIT) {
    throw new Error(`sweep too large: ${count} values (limit ${SWEEP_LIMIT})`);
  }
  const values: number[] = [];
  for (let i = 0; i < count; i++) {
    values.push(Number((from + i * step).toPrecision(12)));
  }
  return values;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  onPick?: (value: number, prediction: Prediction) => void;
}

const NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

export function renderChart(
  container: HTMLElement,
  response: WhatIfResponse,
  options: ChartOptions = {},
): void {
  const width = options.width ?? 640;
  const height = options.height ?? 260;
  const pad = { left: 44, right: 12, top: 18, bottom: 30 };
  container.replaceChildren();

  const ok = response.points.filter(
    (p) => p.prediction !== undefined && typeof p.value === "number",
  );
  const numericValues = response.points
    .map((p) => p.value)
    .filter((v): v is number => typeof v === "number");
  const lo = Math.min(...numericValues);
  const hi = Math.max(...numericValues);
  const spanX = hi > lo ? hi - lo : 1;
  const x = (v: number) =>
    pad.left + ((v - lo) / spanX) * (width - pad.left - pad.right);
  const y = (p: number) =>
    pad.top + (1 - p) * (height - pad.top - pad.bottom);

  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "whatif-chart",
    role: "img",
  });

  const title = svgElement("text", {
    x: String(pad.left),
    y: "12",
    class: "chart-title",
  });
  title.textContent = `${response.feature} sweep`;
  svg.appendChild(title);

  // decision threshold at p = 0.5
  svg.appendChild(
    svgElement("line", {
      x1: String(pad.left),
      x2: String(width - pad.right),
      y1: String(y(0.5)),
      y2: String(y(0.5)),
      class: "threshold-line",
      "stroke-dasharray": "5,4",
    }),
  );
  const thresholdLabel = svgElement("text", {
    x: "4",
    y: String(y(0.5) + 4),
    class: "threshold-label",
  });
  thresholdLabel.textContent = "0.5";
  svg.appendChild(thresholdLabel);

  // line segments: consecutive ok points connect; an erroring point breaks
  // the run, leaving a visible gap instead of a crash or interpolation
  let run: Array<{ vx: number; vy: number }> = [];
  const flush = () => {
    if (run.length >= 2) {
      svg.appendChild(
        svgElement("polyline", {
          points: run.map((p) => `${p.vx},${p.vy}`).join(" "),
          class: "sweep-line",
          fill: "none",
        }),
      );
    }
    run = [];
  };
  for (const point of response.points) {
    if (point.prediction !== undefined && typeof point.value === "number") {
      run.push({ vx: x(point.value), vy: y(point.prediction.p_positive) });
    } else {
      flush();
    }
  }
  flush();

  for (const point of ok) {
    const prediction = point.prediction as Prediction;
    const value = point.value as number;
    const marker = svgElement("circle", {
      cx: String(x(value)),
      cy: String(y(prediction.p_positive)),
      r: "4",
      class: "marker",
      "data-value": String(value),
      "data-p": String(prediction.p_positive),
    });
    const tip = svgElement("title", {});
    tip.textContent = `${response.feature}=${value}: ${prediction.label} (${prediction.p_positive.toFixed(3)})`;
    marker.appendChild(tip);
    if (options.onPick) {
      marker.addEventListener("click", () =>
        options.onPick?.(value, prediction),
      );
    }
    svg.appendChild(marker);
  }

  // x-axis extremes
  for (const v of hi > lo ? [lo, hi] : [lo]) {
    const label = svgElement("text", {
      x: String(x(v)),
      y: String(height - 8),
      class: "axis-label",
      "text-anchor": "middle",
    });
    label.textContent = String(v);
    svg.appendChild(label);
  }

  container.appendChild(svg);

  const failed = response.points.filter((p) => p.error !== undefined);
  if (failed.length > 0) {
    const note = document.createElement("p");
    note.className = "sweep-errors";
    note.textContent = failed
      .map((p) => `${response.feature}=${String(p.value)}: ${p.error}`)
      .join("; ");
    container.appendChild(note);
  }
}
