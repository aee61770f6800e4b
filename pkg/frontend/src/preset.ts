/** Reference scenario: the high-strength partial-design query used in the
 * benchmark. Five variables fixed, cement / fly ash / coarse aggregate left
 * for the model to infer, target 55.5 MPa.
 */

import { ScenarioForm } from "./validation.js";

export const REFERENCE_FIXED: Record<string, number> = {
  bfs: 212.5,
  water: 155.7,
  sp: 14.3,
  fa: 880.4,
  age: 28,
};

export const REFERENCE_TARGET = 55.5;

export function applyReferencePreset(form: ScenarioForm): ScenarioForm {
  return {
    ...form,
    rows: form.rows.map((row) =>
      row.name in REFERENCE_FIXED
        ? { ...row, fixed: true, value: String(REFERENCE_FIXED[row.name]) }
        : { ...row, fixed: false, value: "" }),
    target: String(REFERENCE_TARGET),
  };
}
