/** End-to-end wiring against a mocked service: the page is driven entirely
 * by fetched model info, a sweep issues exactly one batched request, and
 * failures (unreachable service, rejected fields, bad sweep params) surface
 * without extra network traffic. */

import { beforeEach, describe, expect, test, vi } from "vitest";

import type { FetchLike, ModelInfo, Prediction, WhatIfResponse } from "../src/api.js";
import { ServiceClient } from "../src/api.js";
import { startApp } from "../src/app.js";
import infoJson from "./fixtures/model_info.json";
import missingField from "./fixtures/predict_missing_field.json";
import predCad from "./fixtures/predict_cad.json";
import cadRequest from "./fixtures/predict_cad_request.json";
import sweepEf from "./fixtures/whatif_ef_sweep.json";

const info = infoJson as unknown as ModelInfo;
const prediction = predCad as Prediction;
const sweep = sweepEf as unknown as WhatIfResponse;
const record = cadRequest as Record<string, number>;

interface MockService {
  fetchImpl: FetchLike;
  calls: { url: string; body: unknown }[];
  countFor(path: string): number;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function mockService(
  routes: Record<string, (body: unknown) => Response>,
): MockService {
  const calls: { url: string; body: unknown }[] = [];
  const fetchImpl: FetchLike = (url, init) => {
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ url, body });
    for (const [path, handler] of Object.entries(routes)) {
      if (url.endsWith(path)) return Promise.resolve(handler(body));
    }
    return Promise.resolve(jsonResponse({ error: `no route for ${url}` }, 404));
  };
  return {
    fetchImpl,
    calls,
    countFor: (path) => calls.filter((c) => c.url.endsWith(path)).length,
  };
}

function appWith(routes: Record<string, (body: unknown) => Response>) {
  const service = mockService(routes);
  const client = new ServiceClient("http://service.test", service.fetchImpl);
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  return { service, client, root };
}

function fillForm(root: HTMLElement, values: Record<string, number>) {
  for (const [name, value] of Object.entries(values)) {
    const input = root.querySelector<HTMLInputElement | HTMLSelectElement>(
      `.patient-form input[data-feature="${name}"], .patient-form select[data-feature="${name}"]`,
    );
    if (!input) throw new Error(`no field for ${name}`);
    if (input instanceof HTMLInputElement && input.type === "checkbox") {
      input.checked = value >= 0.5;
    } else {
      input.value = String(value);
    }
    input.dispatchEvent(new Event("input", { bubbles: true }));
  }
}

function submitForm(root: HTMLElement) {
  root
    .querySelector(".patient-form")!
    .dispatchEvent(new Event("submit", { cancelable: true }));
}

async function settle() {
  // let the pending fetch promise chains resolve
  await new Promise((resolve) => setTimeout(resolve, 0));
}

beforeEach(() => {
  document.body.replaceChildren();
});

describe("startup", () => {
  test("the page is built from the fetched model info", async () => {
    const { service, client, root } = appWith({
      "/model/info": () => jsonResponse(info),
    });
    await startApp(root, { client });

    expect(service.countFor("/model/info")).toBe(1);
    expect(root.querySelector("h1")!.textContent).toBe(
      `${info.labels.positive} risk assessment`,
    );
    expect(root.querySelector(".model-line")!.textContent).toContain(
      info.model_version,
    );
    expect(
      root.querySelectorAll(".patient-form [data-feature]"),
    ).toHaveLength(info.schema.features.length * 2); // row + control
  });

  test("an unreachable service shows a retry banner, and retrying recovers", async () => {
    let up = false;
    const { service, root } = appWith({
      "/model/info": () => jsonResponse(info),
    });
    const flaky = new ServiceClient("http://service.test", (url, init) =>
      up
        ? service.fetchImpl(url, init)
        : Promise.reject(new TypeError("fetch failed")),
    );

    await startApp(root, { client: flaky });
    expect(root.querySelector(".retry-banner")).not.toBeNull();
    expect(root.querySelector(".retry-message")!.textContent).toContain(
      "Service unavailable",
    );
    expect(root.querySelector(".patient-form")).toBeNull();

    up = true;
    root.querySelector<HTMLButtonElement>(".retry-button")!.click();
    await settle();
    expect(root.querySelector(".retry-banner")).toBeNull();
    expect(root.querySelector(".patient-form")).not.toBeNull();
  });
});

describe("prediction flow", () => {
  test("submitting the form renders the service verdict", async () => {
    const { service, client, root } = appWith({
      "/model/info": () => jsonResponse(info),
      "/predict": (body) => {
        expect(body).toEqual(record);
        return jsonResponse(prediction);
      },
    });
    await startApp(root, { client });
    fillForm(root, record);
    submitForm(root);
    await settle();

    expect(service.countFor("/predict")).toBe(1);
    expect(root.querySelector(".verdict-label")!.textContent).toBe(
      prediction.label,
    );
    expect(root.querySelectorAll(".vote-breakdown tbody tr")).toHaveLength(
      prediction.votes.length,
    );
  });

  test("a rejected field is highlighted with the service's message", async () => {
    const { client, root } = appWith({
      "/model/info": () => jsonResponse(info),
      "/predict": () => jsonResponse(missingField, 400),
    });
    await startApp(root, { client });
    fillForm(root, record);
    submitForm(root);
    await settle();

    const row = root.querySelector('.field-row[data-feature="FBS"]');
    expect(row!.querySelector(".field-error")!.textContent).toBe(
      missingField.error,
    );
    expect(root.querySelector(".verdict-label")).toBeNull();
  });

  test("a non-field service failure is reported in the verdict panel", async () => {
    const { client, root } = appWith({
      "/model/info": () => jsonResponse(info),
      "/predict": () => jsonResponse({ error: "bundle checksum mismatch" }, 500),
    });
    await startApp(root, { client });
    fillForm(root, record);
    submitForm(root);
    await settle();

    expect(root.querySelector(".request-error")!.textContent).toBe(
      "bundle checksum mismatch",
    );
  });
});

describe("what-if sweep", () => {
  function sweepSetup(root: HTMLElement, feature: string, from: number, to: number, step: number) {
    const pick = root.querySelector<HTMLSelectElement>(".sweep-feature")!;
    pick.value = feature;
    pick.dispatchEvent(new Event("change", { bubbles: true }));
    for (const [cls, value] of [
      [".sweep-from", from],
      [".sweep-to", to],
      [".sweep-step", step],
    ] as const) {
      root.querySelector<HTMLInputElement>(cls)!.value = String(value);
    }
    root.querySelector<HTMLButtonElement>(".sweep-run")!.click();
  }

  test("an n-point sweep issues exactly one batched request and renders n markers", async () => {
    const { service, client, root } = appWith({
      "/model/info": () => jsonResponse(info),
      "/whatif": (body) => {
        expect(body).toEqual({
          base: record,
          feature: "EF-TTE",
          values: [15, 20, 25, 30, 35, 40, 45, 50, 55, 60],
        });
        return jsonResponse(sweep);
      },
    });
    await startApp(root, { client });
    fillForm(root, record);
    sweepSetup(root, "EF-TTE", 15, 60, 5);
    await settle();

    expect(service.countFor("/whatif")).toBe(1);
    expect(service.countFor("/predict")).toBe(0);
    expect(root.querySelectorAll(".marker")).toHaveLength(sweep.points.length);
  });

  test("invalid sweep parameters are explained with no request made", async () => {
    const { service, client, root } = appWith({
      "/model/info": () => jsonResponse(info),
    });
    await startApp(root, { client });
    fillForm(root, record);
    sweepSetup(root, "EF-TTE", 15, 60, 0);
    await settle();

    expect(service.countFor("/whatif")).toBe(0);
    expect(root.querySelector(".sweep-problem")!.textContent).toBe(
      "step must be > 0",
    );
  });

  test("an incomplete base form blocks the sweep", async () => {
    const { service, client, root } = appWith({
      "/model/info": () => jsonResponse(info),
    });
    await startApp(root, { client });
    sweepSetup(root, "EF-TTE", 15, 60, 5); // form never filled
    await settle();
    expect(service.countFor("/whatif")).toBe(0);
  });

  test("clicking a marker adopts its value and verdict", async () => {
    const { client, root } = appWith({
      "/model/info": () => jsonResponse(info),
      "/whatif": () => jsonResponse(sweep),
    });
    await startApp(root, { client });
    fillForm(root, record);
    sweepSetup(root, "EF-TTE", 15, 60, 5);
    await settle();

    const marker = root.querySelectorAll(".marker")[2]!;
    marker.dispatchEvent(new Event("click", { bubbles: true }));
    const point = sweep.points[2]!;
    const input = root.querySelector<HTMLInputElement>(
      '.patient-form input[data-feature="EF-TTE"]',
    )!;
    expect(input.value).toBe(String(point.value));
    expect(root.querySelector(".verdict-label")!.textContent).toBe(
      point.prediction!.label,
    );
  });
});
