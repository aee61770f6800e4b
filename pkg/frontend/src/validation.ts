/** Client-side scenario validation against the service's /api/bounds.
 *
 * The form is validated before any request is built; an invalid form never
 * reaches the network. Every displayed number originates from the bounds
 * response or the user's own input.
 */

import { Bounds, DESIGN_VARS, InferRequest } from "./types.js";

export interface VariableRow {
  name: string;
  fixed: boolean;
  /** Raw text from the input field; parsed here, never before. */
  value: string;
}

export interface ScenarioForm {
  rows: VariableRow[];
  target: string;
  model: string;
  candidates: number;
  seed: number;
}

export interface ValidationResult {
  ok: boolean;
  /** field name -> message; empty when ok */
  errors: Record<string, string>;
  request?: InferRequest;
}

export function emptyForm(model = ""): ScenarioForm {
  return {
    rows: DESIGN_VARS.map((name) => ({ name, fixed: false, value: "" })),
    target: "",
    model,
    candidates: 1,
    seed: 0,
  };
}

function parseNumber(text: string): number | null {
  const trimmed = text.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

export function validateScenario(
  form: ScenarioForm,
  bounds: Bounds,
): ValidationResult {
  const errors: Record<string, string> = {};
  const fixed: Record<string, number> = {};

  for (const row of form.rows) {
    if (!row.fixed) continue;
    const value = parseNumber(row.value);
    if (value === null) {
      errors[row.name] = "enter a number";
      continue;
    }
    const bound = bounds[row.name];
    if (bound && (value < bound.min || value > bound.max)) {
      errors[row.name] =
        `must be between ${bound.min} and ${bound.max} ${bound.unit}`;
      continue;
    }
    fixed[row.name] = value;
  }

  const target = parseNumber(form.target);
  if (target === null) {
    errors["target_strength"] = "enter a number";
  } else if (target <= 0) {
    errors["target_strength"] = "must be above 0";
  } else {
    const bound = bounds["strength"];
    if (bound && (target < bound.min || target > bound.max)) {
      errors["target_strength"] =
        `must be between ${bound.min} and ${bound.max} ${bound.unit}`;
    }
  }

  if (!form.model) {
    errors["model"] = "choose a model";
  }
  if (!Number.isInteger(form.candidates) || form.candidates < 1) {
    errors["candidates"] = "must be a whole number of at least 1";
  }
  const allFixed = form.rows.every((row) => row.fixed);
  if (allFixed && form.candidates > 1) {
    errors["candidates"] =
      "all variables are fixed; only one candidate exists";
  }

  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  return {
    ok: true,
    errors: {},
    request: {
      fixed,
      target_strength: target as number,
      model: form.model,
      candidates: form.candidates,
      seed: form.seed,
    },
  };
}
