/** Page wiring: fetch model info (full-page retry state if the service is
 * down), build the form from the schema, run predictions and batched
 * what-if sweeps with a single in-flight request at a time. */

import { ApiError, ServiceClient } from "./api.js";
import type { ModelInfo, Prediction } from "./api.js";
import { renderForm } from "./form.js";
import type { FormHandle } from "./form.js";
import { renderVerdict } from "./verdict.js";
import { renderChart, sweepValues } from "./whatif.js";

export interface AppOptions {
  baseUrl?: string;
  client?: ServiceClient;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string,
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

function renderRetry(root: HTMLElement, message: string, retry: () => void): void {
  root.replaceChildren();
  const banner = el("div", "retry-banner");
  banner.appendChild(el("p", "retry-message", `Service unavailable: ${message}`));
  const button = el("button", "retry-button", "Retry");
  button.addEventListener("click", retry);
  banner.appendChild(button);
  root.appendChild(banner);
}

function sweepControls(
  info: ModelInfo,
  onRun: (feature: string, values: number[]) => void,
): HTMLElement {
  const panel = el("section", "whatif-controls");
  panel.appendChild(el("h3", "", "What-if sweep"));

  const select = document.createElement("select");
  select.className = "sweep-feature";
  const sweepable = info.schema.features.filter((f) => f.kind !== "binary");
  for (const spec of sweepable) {
    const option = document.createElement("option");
    option.value = spec.name;
    option.textContent = spec.name;
    select.appendChild(option);
  }

  const from = document.createElement("input");
  const to = document.createElement("input");
  const step = document.createElement("input");
  for (const [input, cls] of [
    [from, "sweep-from"],
    [to, "sweep-to"],
    [step, "sweep-step"],
  ] as const) {
    input.type = "number";
    input.step = "any";
    input.className = cls;
  }

  const prefill = () => {
    const spec = sweepable.find((f) => f.name === select.value);
    if (!spec) return;
    from.value = String(spec.min);
    to.value = String(spec.max);
    step.value = spec.kind === "numeric" ? String((spec.max - spec.min) / 9) : "1";
  };
  select.addEventListener("change", prefill);
  prefill();

  const problem = el("p", "sweep-problem");
  const run = el("button", "sweep-run", "Sweep");
  run.addEventListener("click", () => {
    problem.textContent = "";
    let values: number[];
    try {
      values = sweepValues(Number(from.value), Number(to.value), Number(step.value));
    } catch (err) {
      problem.textContent = err instanceof Error ? err.message : String(err);
      return; // invalid sweep parameters never reach the network
    }
    onRun(select.value, values);
  });

  for (const node of [select, from, to, step, run, problem]) {
    panel.appendChild(node);
  }
  return panel;
}

export async function startApp(
  root: HTMLElement,
  options: AppOptions = {},
): Promise<void> {
  const client =
    options.client ?? new ServiceClient(options.baseUrl ?? "http://127.0.0.1:8000");
  root.replaceChildren(el("p", "loading", "Loading model…"));

  let info: ModelInfo;
  try {
    info = await client.modelInfo();
  } catch (err) {
    renderRetry(root, err instanceof Error ? err.message : String(err), () => {
      void startApp(root, options);
    });
    return;
  }

  root.replaceChildren();
  const header = el("header", "app-header");
  header.appendChild(el("h1", "", `${info.labels.positive} risk assessment`));
  header.appendChild(
    el(
      "p",
      "model-line",
      `model ${info.model_kind} (${info.members.join(" + ")}) — ${info.model_version}`,
    ),
  );
  root.appendChild(header);

  const formPanel = el("section", "form-panel");
  const verdictPanel = el("section", "verdict-panel");
  const chartPanel = el("section", "chart-panel");
  root.appendChild(formPanel);
  root.appendChild(verdictPanel);
  root.appendChild(chartPanel);

  let busy = false;
  let form: FormHandle;

  const showPrediction = (prediction: Prediction) => {
    renderVerdict(verdictPanel, prediction, info);
  };

  const submit = async (record: Record<string, number>) => {
    if (busy) return; // one in-flight request per user action
    busy = true;
    form.clearServiceErrors();
    try {
      showPrediction(await client.predict(record));
    } catch (err) {
      if (err instanceof ApiError && err.fields.length > 0) {
        form.markServiceErrors(err.fields, err.message);
      } else {
        verdictPanel.replaceChildren(
          el("p", "request-error", err instanceof Error ? err.message : String(err)),
        );
      }
    } finally {
      busy = false;
    }
  };

  form = renderForm(formPanel, info, (record) => {
    void submit(record);
  });

  const runSweep = async (feature: string, values: number[]) => {
    if (busy) return;
    const record = form.readRecord();
    if (record === null) return; // sweep needs a valid base form
    busy = true;
    try {
      const response = await client.whatif(record, feature, values);
      renderChart(chartPanel, response, {
        onPick: (value, prediction) => {
          form.setValue(feature, value);
          showPrediction(prediction); // the clicked point feeds the next move
        },
      });
    } catch (err) {
      chartPanel.replaceChildren(
        el("p", "request-error", err instanceof Error ? err.message : String(err)),
      );
    } finally {
      busy = false;
    }
  };

  root.insertBefore(
    sweepControls(info, (feature, values) => {
      void runSweep(feature, values);
    }),
    chartPanel,
  );
}
