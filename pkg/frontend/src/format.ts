/** Presentation helpers for candidate tables. */

import { Candidate } from "./types.js";

/** "+6.23 MPa over target" / "-1.20 MPa under target" / "on target". */
export function formatDeviation(deviation: number): string {
  const rounded = Number(deviation.toFixed(2));
  if (rounded === 0) return "on target";
  const sign = rounded > 0 ? "+" : "-";
  const word = rounded > 0 ? "over" : "under";
  return `${sign}${Math.abs(rounded).toFixed(2)} MPa ${word} target`;
}

export function formatValue(value: number, digits = 2): string {
  return value.toFixed(digits);
}

/** Stable sort by |deviation|, closest candidate first. */
export function sortByAbsDeviation(candidates: Candidate[]): Candidate[] {
  return candidates
    .map((candidate, index) => ({ candidate, index }))
    .sort((a, b) =>
      Math.abs(a.candidate.deviation) - Math.abs(b.candidate.deviation)
      || a.index - b.index)
    .map((entry) => entry.candidate);
}
