/** Form contract: every constraint on screen originates from /model/info. */

import { describe, expect, test, vi } from "vitest";

import type { ModelInfo } from "../src/api.js";
import { renderForm } from "../src/form.js";
import alteredJson from "./fixtures/model_info_altered.json";
import infoJson from "./fixtures/model_info.json";
import missingField from "./fixtures/predict_missing_field.json";
import cadRequest from "./fixtures/predict_cad_request.json";

const info = infoJson as unknown as ModelInfo;
const altered = alteredJson as unknown as ModelInfo;
const validRecord = cadRequest as Record<string, number>;

function mount(modelInfo: ModelInfo, onSubmit: (r: Record<string, number>) => void = () => {}) {
  const container = document.createElement("div");
  const handle = renderForm(container, modelInfo, onSubmit);
  return { container, handle };
}

function fill(handle: ReturnType<typeof renderForm>, record: Record<string, number>) {
  for (const [name, value] of Object.entries(record)) {
    handle.setValue(name, value);
  }
}

describe("rendered constraints come from the service schema", () => {
  test("numeric fields carry the schema min/max exactly", () => {
    const { container } = mount(info);
    for (const spec of info.schema.features.filter((f) => f.kind === "numeric")) {
      const input = container.querySelector<HTMLInputElement>(
        `input[data-feature="${spec.name}"]`,
      );
      expect(input, spec.name).not.toBeNull();
      expect(input!.type).toBe("number");
      expect(input!.min).toBe(String(spec.min));
      expect(input!.max).toBe(String(spec.max));
    }
  });

  test("binary fields render as toggles, ordinals as full-range selectors", () => {
    const { container } = mount(info);
    for (const spec of info.schema.features) {
      if (spec.kind === "binary") {
        const input = container.querySelector<HTMLInputElement>(
          `input[data-feature="${spec.name}"]`,
        );
        expect(input!.type).toBe("checkbox");
      } else if (spec.kind === "ordinal") {
        const select = container.querySelector<HTMLSelectElement>(
          `select[data-feature="${spec.name}"]`,
        );
        expect(select).not.toBeNull();
        const options = Array.from(select!.options).map((o) => Number(o.value));
        expect(options[0]).toBe(spec.min);
        expect(options[options.length - 1]).toBe(spec.max);
        expect(options).toHaveLength(spec.max - spec.min + 1);
      }
    }
  });

  test("a different bundle schema changes the rendered ranges with no UI change", () => {
    const { container } = mount(altered);
    const byName = new Map(altered.schema.features.map((f) => [f.name, f]));
    for (const [name, spec] of byName) {
      if (spec.kind !== "numeric") continue;
      const input = container.querySelector<HTMLInputElement>(
        `input[data-feature="${name}"]`,
      );
      expect(input!.min).toBe(String(spec.min));
      expect(input!.max).toBe(String(spec.max));
      // and those differ from the first bundle's ranges
      const original = info.schema.features.find((f) => f.name === name)!;
      expect(spec.min).not.toBe(original.min);
    }
  });
});

describe("validity gating", () => {
  test("empty form disables submit", () => {
    const { handle } = mount(info);
    expect(handle.submitButton.disabled).toBe(true);
    expect(handle.readRecord()).toBeNull();
  });

  test("a recorded valid record enables submit and round-trips", () => {
    const { handle } = mount(info);
    fill(handle, validRecord);
    expect(handle.submitButton.disabled).toBe(false);
    expect(handle.readRecord()).toEqual(validRecord);
  });

  test("out-of-range input blocks submit with a message citing the range", () => {
    const { container, handle } = mount(info);
    fill(handle, validRecord);
    handle.setValue("BP", 500);
    expect(handle.submitButton.disabled).toBe(true);
    const bp = info.schema.features.find((f) => f.name === "BP")!;
    const error = container.querySelector(
      '.field-row[data-feature="BP"] .field-error',
    );
    expect(error!.textContent).toContain(`${bp.min}..${bp.max}`);
  });

  test("submit hands the exact record to the callback", () => {
    const onSubmit = vi.fn();
    const { handle } = mount(info, onSubmit);
    fill(handle, validRecord);
    handle.element.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(onSubmit).toHaveBeenCalledTimes(1);
    expect(onSubmit).toHaveBeenCalledWith(validRecord);
  });

  test("no submit while invalid", () => {
    const onSubmit = vi.fn();
    const { handle } = mount(info, onSubmit);
    handle.element.dispatchEvent(new Event("submit", { cancelable: true }));
    expect(onSubmit).not.toHaveBeenCalled();
  });
});

describe("service-side rejections", () => {
  test("fields named by an error body get highlighted with its message", () => {
    const { container, handle } = mount(info);
    fill(handle, validRecord);
    handle.markServiceErrors(missingField.fields, missingField.error);
    for (const name of missingField.fields) {
      const row = container.querySelector(`.field-row[data-feature="${name}"]`);
      expect(row!.querySelector(".field-error")!.textContent).toBe(
        missingField.error,
      );
      expect(row!.querySelector("input")!.classList.contains("invalid")).toBe(
        true,
      );
    }
  });

  test("clearServiceErrors restores local validation state", () => {
    const { container, handle } = mount(info);
    fill(handle, validRecord);
    handle.markServiceErrors(["FBS"], "rejected");
    handle.clearServiceErrors();
    const row = container.querySelector('.field-row[data-feature="FBS"]');
    expect(row!.querySelector(".field-error")!.textContent).toBe("");
  });
});
