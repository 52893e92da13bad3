/** Patient form built entirely from the service's schema: numeric fields
 * carry the schema's min/max, binaries render as toggles, ordinals as
 * selectors. Nothing here knows a feature name or range at compile time. */

import type { FeatureSpec, ModelInfo } from "./api.js";

export interface FormHandle {
  element: HTMLFormElement;
  /** Raw field values keyed by feature name; null while any field is invalid. */
  readRecord(): Record<string, number> | null;
  setValue(name: string, value: number): void;
  isValid(): boolean;
  /** Highlight service-rejected fields (from an error body's `fields`). */
  markServiceErrors(fields: string[], message: string): void;
  clearServiceErrors(): void;
  submitButton: HTMLButtonElement;
}

interface FieldBits {
  spec: FeatureSpec;
  input: HTMLInputElement | HTMLSelectElement;
  error: HTMLElement;
}

function numericField(spec: FeatureSpec): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "number";
  input.min = String(spec.min);
  input.max = String(spec.max);
  input.step = "any";
  input.required = true;
  return input;
}

function binaryField(): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "checkbox";
  return input;
}

function ordinalField(spec: FeatureSpec): HTMLSelectElement {
  const select = document.createElement("select");
  for (let v = Math.round(spec.min); v <= Math.round(spec.max); v++) {
    const option = document.createElement("option");
    option.value = String(v);
    option.textContent = String(v);
    select.appendChild(option);
  }
  return select;
}

function rangeText(spec: FeatureSpec): string {
  return `${spec.min}..${spec.max}`;
}

function validate(bits: FieldBits): string {
  const { spec, input } = bits;
  if (spec.kind !== "numeric") return ""; // toggles/selectors cannot go wrong
  const raw = (input as HTMLInputElement).value.trim();
  if (raw === "") return "required";
  const value = Number(raw);
  if (!Number.isFinite(value)) return "must be a number";
  if (value < spec.min || value > spec.max) {
    return `must be in ${rangeText(spec)}`;
  }
  return "";
}

export function renderForm(
  container: HTMLElement,
  info: ModelInfo,
  onSubmit: (record: Record<string, number>) => void,
): FormHandle {
  const form = document.createElement("form");
  form.className = "patient-form";
  const fields = new Map<string, FieldBits>();

  for (const spec of info.schema.features) {
    const row = document.createElement("div");
    row.className = "field-row";
    row.dataset.feature = spec.name;

    const label = document.createElement("label");
    label.textContent =
      spec.kind === "numeric"
        ? `${spec.name} (${spec.unit}, ${rangeText(spec)})`
        : spec.name;

    const input =
      spec.kind === "numeric"
        ? numericField(spec)
        : spec.kind === "binary"
          ? binaryField()
          : ordinalField(spec);
    input.setAttribute("data-feature", spec.name);

    const error = document.createElement("span");
    error.className = "field-error";

    label.appendChild(input);
    row.appendChild(label);
    row.appendChild(error);
    form.appendChild(row);
    fields.set(spec.name, { spec, input, error });
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Assess";
  form.appendChild(submit);
  container.appendChild(form);

  const refresh = () => {
    let allValid = true;
    for (const bits of fields.values()) {
      const problem = validate(bits);
      bits.error.textContent = problem;
      bits.input.classList.toggle("invalid", problem !== "");
      if (problem !== "") allValid = false;
    }
    submit.disabled = !allValid;
    return allValid;
  };

  const read = (): Record<string, number> | null => {
    if (!refresh()) return null;
    const record: Record<string, number> = {};
    for (const [name, bits] of fields) {
      if (bits.spec.kind === "binary") {
        record[name] = (bits.input as HTMLInputElement).checked ? 1 : 0;
      } else {
        record[name] = Number(
          (bits.input as HTMLInputElement | HTMLSelectElement).value,
        );
      }
    }
    return record;
  };

  form.addEventListener("input", refresh);
  form.addEventListener("change", refresh);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const record = read();
    if (record !== null) onSubmit(record);
  });
  refresh();

  return {
    element: form,
    readRecord: read,
    isValid: () => refresh(),
    setValue(name, value) {
      const bits = fields.get(name);
      if (!bits) return;
      if (bits.spec.kind === "binary") {
        (bits.input as HTMLInputElement).checked = value >= 0.5;
      } else {
        bits.input.value = String(value);
      }
      refresh();
    },
    markServiceErrors(names, message) {
      for (const name of names) {
        const bits = fields.get(name);
        if (bits) {
          bits.error.textContent = message;
          bits.input.classList.add("invalid");
        }
      }
    },
    clearServiceErrors() {
      refresh();
    },
    submitButton: submit,
  };
}
